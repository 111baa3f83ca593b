"""Command-line entry point: ``pathcalc {generate,qv,derive,integrate,verify}``.

Every output file starts with ``#`` lines echoing the resolved
configuration and the package version.  Numbers are printed with 17
significant digits.  Exit codes: 0 success, 1 computation error, 2 bad
configuration.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
from typing import Any, Iterator, Sequence

import numpy as np

from . import __version__
from .derivatives import FDScheme, compare, relative_error
from .errors import ConfigError, DomainError, PathCalcError
from .follmer import MODES, SUMMATIONS, change_of_variable_report, follmer_sum
from .functionals import builtin
from .generators import GenSpec, KINDS, generate, meta_path, read_meta, write_meta
from .paths import CadlagPath, PathPair, read_path_csv, write_path_csv
from .qv import SCHEMES, discrete_qv, subdivision_for

DEFAULTS: dict[str, Any] = {
    # generation
    "kind": None, "seed": 42, "depth": 14, "sigma": 1.0, "rate": 0.0, "alpha": 0.75,
    "horizon": 1.0, "jump_law": "uniform", "jump_low": -0.5, "jump_high": 0.5,
    "amplitude": None, "name": "linear", "t0": 0.5, "freq": 1.0, "dim": 1,
    # inputs and outputs
    "out": "-", "path_file": None, "meta_file": None,
    # analysis
    "functional": None, "levels": "8..14", "scheme": "dyadic", "mode": "continuous",
    "use_fd": False, "v_const": None, "at": None, "component": 1, "summation": "fsum",
    "tol_vertical_eps": 1e-5, "tol_hessian_eps": 1e-3, "tol_horizontal_steps": 2,
}

# settings each subcommand reads (echoed in the output header)
USES = {
    "generate": ["kind", "seed", "depth", "sigma", "rate", "alpha", "horizon", "jump_law", "jump_low",
                 "jump_high", "amplitude", "name", "t0", "freq", "dim", "out", "meta_file"],
    "qv": ["path_file", "meta_file", "levels", "scheme", "v_const", "component", "out"],
    "derive": ["functional", "path_file", "meta_file", "at", "v_const", "tol_vertical_eps",
               "tol_hessian_eps", "tol_horizontal_steps", "out"],
    "integrate": ["functional", "path_file", "meta_file", "levels", "scheme", "mode", "use_fd",
                  "v_const", "summation", "tol_vertical_eps", "tol_hessian_eps",
                  "tol_horizontal_steps", "out"],
    "verify": ["functional", "path_file", "meta_file", "levels", "scheme", "mode", "use_fd",
               "v_const", "summation", "tol_vertical_eps", "tol_hessian_eps",
               "tol_horizontal_steps", "out"],
}
_GEN_KEYS = USES["generate"][:-2]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pathcalc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pathcalc {__version__}")
    subs = parser.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="JSON file of settings (flags take precedence)")
        sp.add_argument("--out", help="output file ('-' for stdout)")

    def path_source(sp):
        sp.add_argument("--path-file", help="input path CSV")
        sp.add_argument("--meta-file", help="generator sidecar (default: <path>.meta.csv if present)")
        sp.add_argument("--v-const", type=float, help="constant second argument v (default: sigma^2 from the sidecar, else 1)")
        gen_flags(sp)

    def gen_flags(sp):
        sp.add_argument("--kind", choices=KINDS)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--depth", type=int)
        sp.add_argument("--sigma", type=float)
        sp.add_argument("--rate", type=float)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--horizon", type=float)
        sp.add_argument("--jump-law", choices=("uniform", "constant"))
        sp.add_argument("--jump-low", type=float)
        sp.add_argument("--jump-high", type=float)
        sp.add_argument("--amplitude", type=float)
        sp.add_argument("--name", help="deterministic path: linear, step or sine")
        sp.add_argument("--t0", type=float)
        sp.add_argument("--freq", type=float)
        sp.add_argument("--dim", type=int)

    def fd_flags(sp):
        sp.add_argument("--tol-vertical-eps", type=float)
        sp.add_argument("--tol-hessian-eps", type=float)
        sp.add_argument("--tol-horizontal-steps", type=int)

    def analysis(sp):
        sp.add_argument("--functional", help="name[:key=value,...], e.g. cylinder:f=t*x^2")
        sp.add_argument("--levels", help="inclusive range A..B")
        sp.add_argument("--scheme", choices=SCHEMES)
        sp.add_argument("--mode", choices=MODES)
        sp.add_argument("--use-fd", action="store_true", default=None)
        sp.add_argument("--summation", choices=SUMMATIONS)
        fd_flags(sp)

    sp = subs.add_parser("generate", help="write a seeded sample path and its sidecar")
    common(sp)
    gen_flags(sp)
    sp.add_argument("--meta-file")

    sp = subs.add_parser("qv", help="discrete quadratic variation per level")
    common(sp)
    path_source(sp)
    sp.add_argument("--levels")
    sp.add_argument("--scheme", choices=SCHEMES)
    sp.add_argument("--component", type=int, help="1-based component index")

    sp = subs.add_parser("derive", help="analytic versus finite-difference derivatives")
    common(sp)
    path_source(sp)
    sp.add_argument("--functional")
    sp.add_argument("--at", help="comma-separated grid times (default: 8 spread times)")
    fd_flags(sp)

    for name, text in (("integrate", "Follmer sums per level"),
                       ("verify", "change-of-variable report per level")):
        sp = subs.add_parser(name, help=text)
        common(sp)
        path_source(sp)
        analysis(sp)
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path!r} is not valid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def resolve(command: str, ns: argparse.Namespace) -> dict:
    """Flags > config file > defaults, restricted to the settings the command reads."""
    cfg = _load_config(getattr(ns, "config", None))
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    out = {}
    for key, default in DEFAULTS.items():
        flag = getattr(ns, key, None)
        out[key] = flag if flag is not None else cfg.get(key, default)
    if command != "generate" and out["path_file"] is None and out["kind"] is None:
        raise ConfigError("give --path-file, or --kind to generate a path in memory")
    if command in ("derive", "integrate", "verify") and not out["functional"]:
        raise ConfigError("--functional is required, e.g. --functional quadratic_cylinder")
    if command == "generate" and out["kind"] is None:
        raise ConfigError("--kind is required")
    return out


def parse_levels(text: str) -> range:
    """``"A..B"`` (inclusive) or a single level."""
    try:
        if ".." in str(text):
            a, b = str(text).split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"levels must look like A..B, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise ConfigError(f"bad level range {text!r}")
    return range(lo, hi + 1)


def _gen_spec(cfg: dict) -> GenSpec:
    amplitude = cfg["amplitude"]
    if amplitude is None:
        amplitude = 1.0 if cfg["kind"] == "deterministic" else 0.1
    return GenSpec(kind=cfg["kind"], T=float(cfg["horizon"]), depth=int(cfg["depth"]), seed=int(cfg["seed"]),
                   sigma=float(cfg["sigma"]), rate=float(cfg["rate"]), jump_law=cfg["jump_law"],
                   jump_low=float(cfg["jump_low"]), jump_high=float(cfg["jump_high"]),
                   alpha=float(cfg["alpha"]), amplitude=float(amplitude), name=cfg["name"],
                   t0=float(cfg["t0"]), freq=float(cfg["freq"]), dim=int(cfg["dim"]))


@contextlib.contextmanager
def _output(target: str) -> Iterator:
    if target in (None, "-"):
        yield sys.stdout
        return
    try:
        fh = open(target, "w", newline="")
    except OSError as exc:
        raise ConfigError(f"cannot write {target!r}: {exc.strerror}") from None
    with fh:
        yield fh


def _shown_keys(command: str, cfg: dict) -> list[str]:
    keys = list(USES[command])
    if command != "generate" and cfg["path_file"] is None:
        keys += [k for k in _GEN_KEYS if k not in keys]
    return keys


def _header(command: str, cfg: dict, extra: dict | None = None) -> list[str]:
    lines = [f"pathcalc {__version__}", f"command={command}"]
    shown = {k: cfg[k] for k in _shown_keys(command, cfg)}
    shown.update(extra or {})
    lines += [f"{k}={_fmt(v)}" for k, v in sorted(shown.items())]
    return lines


def _write_table(fh, header: list[str], columns: Sequence[str], rows, notes: Sequence[str] = ()) -> None:
    for line in header:
        fh.write(f"# {line}\n")
    for line in notes:
        fh.write(f"# {line}\n")
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(c) for c in row) + "\n")


def _load_pair(cfg: dict) -> tuple[PathPair, dict]:
    """Input pair plus facts to echo (v value, its origin)."""
    sigma2 = None
    if cfg["path_file"]:
        try:
            with open(cfg["path_file"]) as fh:
                x = read_path_csv(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read path file {cfg['path_file']!r}: {exc.strerror}") from None
        meta = cfg["meta_file"] or meta_path(cfg["path_file"])
        if os.path.exists(meta):
            try:
                with open(meta) as fh:
                    settings, _ = read_meta(fh)
                sigma2 = float(settings.get("sigma2", "nan"))
            except (OSError, ValueError, IndexError):
                raise ConfigError(f"cannot parse sidecar {meta!r}") from None
        elif cfg["meta_file"]:
            raise ConfigError(f"sidecar {meta!r} not found")
    else:
        x, truth = generate(_gen_spec(cfg))
        sigma2 = truth.sigma2
    if cfg["v_const"] is not None:
        v, origin = float(cfg["v_const"]), "flag"
    elif sigma2 is not None and math.isfinite(sigma2) and sigma2 > 0:
        v, origin = sigma2, "sidecar sigma2"
    else:
        v, origin = 1.0, "default"
    if v < 0:
        raise ConfigError("--v-const must be nonnegative")
    return PathPair.with_constant_v(x, v), {"v_value": v, "v_origin": origin, "path_depth": x.grid_depth}


def _fd(cfg: dict) -> FDScheme:
    return FDScheme(float(cfg["tol_vertical_eps"]), float(cfg["tol_hessian_eps"]),
                    int(cfg["tol_horizontal_steps"]))


def _check_levels(levels: range, pair: PathPair) -> None:
    if levels.stop - 1 > pair.x.grid_depth:
        raise ConfigError(f"level exceeds grid depth ({levels.stop - 1} > {pair.x.grid_depth})")


def cmd_generate(cfg: dict) -> int:
    spec = _gen_spec(cfg)
    path, truth = generate(spec)
    header = _header("generate", cfg, {"amplitude": spec.amplitude})
    out = cfg["out"]
    if out in (None, "-"):
        write_path_csv(path, sys.stdout, header)
        return 0
    meta = cfg["meta_file"] or meta_path(out)
    with _output(out) as fh:
        write_path_csv(path, fh, header)
    with _output(meta) as fh:
        write_meta(fh, spec, truth, header)
    return 0


def cmd_qv(cfg: dict) -> int:
    pair, facts = _load_pair(cfg)
    levels = parse_levels(cfg["levels"])
    _check_levels(levels, pair)
    comp = int(cfg["component"]) - 1
    if not 0 <= comp < pair.dim:
        raise ConfigError(f"component must be in 1..{pair.dim}")
    rows = []
    for n in levels:
        q = discrete_qv(pair.x, subdivision_for(pair, n, cfg["scheme"]), comp)
        atomic = q.atomic
        for t, c, a in zip(q.times, q.curve, atomic):
            rows.append((n, float(t), float(c), float(c - a), float(a)))
    with _output(cfg["out"]) as fh:
        _write_table(fh, _header("qv", cfg, facts), ["level", "t", "curve", "continuous", "atomic"], rows)
    return 0


def _default_times(pair: PathPair, scheme: FDScheme) -> list[float]:
    n = pair.x.n
    room = 2 ** (scheme.horizontal_steps - 1)
    if n <= room:
        raise ConfigError("path too short for the horizontal stencil")
    blocked = set(pair.x.registry_indices().tolist())
    ks = []
    for k in np.linspace(0, n - room, 8).astype(int).tolist():
        while k in blocked and k > 0:
            k -= 1
        if k not in ks:
            ks.append(k)
    return [k * pair.x.dt for k in ks]


def cmd_derive(cfg: dict) -> int:
    pair, facts = _load_pair(cfg)
    F = builtin(cfg["functional"])
    scheme = _fd(cfg)
    if cfg["at"]:
        try:
            times = [float(s) for s in str(cfg["at"]).split(",")]
        except ValueError:
            raise ConfigError(f"--at must be comma-separated numbers, got {cfg['at']!r}") from None
    else:
        times = _default_times(pair, scheme)
    rows = []
    try:
        times = [pair.x.index_of(t) * pair.x.dt for t in times]
    except DomainError as exc:
        raise ConfigError(f"--at: {exc}") from None
    for t in times:
        for quantity, comp, an, fd in compare(F, pair, t, scheme):
            err = abs(fd - an)
            rows.append((t, quantity, comp, an, fd, err, relative_error(an, fd)))
    with _output(cfg["out"]) as fh:
        _write_table(fh, _header("derive", cfg, facts),
                     ["t", "quantity", "component", "analytic", "fd", "abs_error", "rel_error"], rows)
    return 0


def _analysis_setup(cfg: dict):
    pair, facts = _load_pair(cfg)
    levels = parse_levels(cfg["levels"])
    _check_levels(levels, pair)
    if cfg["mode"] == "cadlag" and cfg["scheme"] == "dyadic":
        raise ConfigError("--mode cadlag needs --scheme jump or --scheme stopping")
    F = builtin(cfg["functional"])
    return pair, facts, levels, F


def cmd_integrate(cfg: dict) -> int:
    pair, facts, levels, F = _analysis_setup(cfg)
    rows = []
    for n in levels:
        sub = subdivision_for(pair, n, cfg["scheme"])
        s = follmer_sum(F, pair, sub, cfg["mode"], not cfg["use_fd"], _fd(cfg), cfg["summation"])
        rows.append((n, cfg["scheme"], cfg["mode"], s))
    with _output(cfg["out"]) as fh:
        _write_table(fh, _header("integrate", cfg, facts), ["level", "scheme", "mode", "follmer"], rows)
    return 0


def cmd_verify(cfg: dict) -> int:
    pair, facts, levels, F = _analysis_setup(cfg)
    reports = change_of_variable_report(F, pair, levels, cfg["scheme"], cfg["mode"],
                                        not cfg["use_fd"], _fd(cfg), cfg["summation"])
    rows = [(r.level, r.lhs, r.term_horizontal, r.term_trace, r.term_follmer, r.term_jumps, r.residual)
            for r in reports]
    notes = [f"level {r.level} failed: {r.error}" for r in reports if r.error]
    with _output(cfg["out"]) as fh:
        _write_table(fh, _header("verify", cfg, facts),
                     ["level", "lhs", "horizontal", "trace", "follmer", "jumps", "residual"], rows, notes)
    for note in notes:
        print(f"pathcalc: {note}", file=sys.stderr)
    return 1 if notes else 0


COMMANDS = {"generate": cmd_generate, "qv": cmd_qv, "derive": cmd_derive,
            "integrate": cmd_integrate, "verify": cmd_verify}


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit code."""
    try:
        ns = build_parser().parse_args(argv)
        if not ns.command:
            raise ConfigError("choose a subcommand: " + ", ".join(COMMANDS))
        cfg = resolve(ns.command, ns)
        return COMMANDS[ns.command](cfg)
    except ConfigError as exc:
        print(f"pathcalc: error: {exc}", file=sys.stderr)
        return 2
    except (PathCalcError, ArithmeticError) as exc:
        print(f"pathcalc: computation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
