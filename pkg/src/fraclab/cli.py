"""Command-line front end: ``fraclab {eigen,groundstate,verify,sweep,extend}``.

Exit codes: 0 pass, 1 verification failure, 2 bad configuration. Reports
embed the resolved :class:`RunConfig`, and floats are written with 17
significant digits so identical runs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from .discretization import Params
from .eigensolver import qualitative_report, solve
from .extension import default_grids, extension_consistency, nodal_domains, poisson_extend, tail_moment
from .potentials import PotentialSyntaxError, parse_potential
from .semilinear import _validate, ground_state
from .specfun import frac_constants

__all__ = ["RunConfig", "ConfigError", "main", "execute", "dumps"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
COMMANDS = ("eigen", "groundstate", "verify", "sweep", "extend")
SWEEP_AXES = ("s", "t", "p", "lambda")
TAIL_TIMES = (10.0, 50.0, 100.0)
CONSISTENCY_PROBES = (0.2, 0.5, 0.8)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# serialisation
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _plain(obj):
    """Convert numpy scalars/arrays and tuples into plain Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _dump(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if obj is None or obj is True or obj is False or isinstance(obj, (str, int)) and not isinstance(obj, float):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_dump(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _dump(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON with 17-significant-digit floats and NaN/inf written as null."""
    return _dump(_plain(obj), indent, 0) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(["" if v is None else _fmt(v) if isinstance(v, float) else v for v in _plain(list(row))])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: int = 1
    s: float = 0.5
    p: float = 2.0
    lam: float = 0.0
    V: str = "0"
    n_basis: int = 32
    quad_order: int | None = None
    grid_size: int | None = None
    seed: int = 42
    output_path: str | None = None
    format: str | None = None
    only: tuple = ()
    axis: str | None = None
    start: float | None = None
    end: float | None = None
    steps: int = 8
    k: int = 2
    ground: bool = False

    def as_dict(self) -> dict:
        d = asdict(self)
        d["only"] = list(self.only)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
        d = dict(d)
        d["only"] = tuple(d.get("only") or ())
        return cls(**d)

    def params(self, s: float | None = None) -> Params:
        return Params(self.N, self.s if s is None else s, self.n_basis, self.quad_order)


def _default_grid(command: str) -> int:
    # extension fields are cells x (cells + 1) tables; keep the default cheap
    return 200 if command == "extend" else 1024


def resolve(cfg: RunConfig) -> RunConfig:
    """Fill command-dependent defaults and validate every field before dispatch."""
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    fmt = cfg.format or ("csv" if cfg.command == "sweep" else "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"format must be json or csv, got {fmt!r}")
    grid = cfg.grid_size if cfg.grid_size is not None else _default_grid(cfg.command)
    cfg = replace(cfg, format=fmt, grid_size=int(grid))
    if not (0 < cfg.s < 1):
        raise ConfigError(f"s must lie in the open interval (0, 1), got {cfg.s}")
    try:
        cfg.params()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.command in ("eigen", "verify", "sweep") and cfg.grid_size < 256:
        raise ConfigError("grid-size must be >= 256")
    if cfg.command == "extend" and cfg.grid_size < 16:
        raise ConfigError("grid-size must be >= 16 for extend")
    if cfg.command in ("eigen", "sweep", "extend"):
        try:
            parse_potential(cfg.V)
        except PotentialSyntaxError as exc:
            raise ConfigError(f"bad potential {cfg.V!r}: {exc}") from exc
    if cfg.command in ("eigen", "extend") and not 1 <= cfg.k <= min(cfg.n_basis, 10):
        raise ConfigError("k must lie in 1..min(n_basis, 10)")
    if cfg.command == "groundstate" or (cfg.command == "extend" and cfg.ground):
        _check_semilinear(cfg.params(), cfg.p, cfg.lam)
    if cfg.command == "verify":
        from .verify import SUITES

        bad = [name for name in cfg.only if name not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {', '.join(bad)}; choose from {', '.join(SUITES)}")
    if cfg.command == "sweep":
        _check_sweep(cfg)
        _workers()
    return cfg


def _check_semilinear(params: Params, p: float, lam: float):
    try:
        _validate(params, p, lam)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _check_sweep(cfg: RunConfig):
    if cfg.axis not in SWEEP_AXES:
        raise ConfigError(f"sweep needs --axis in {{{', '.join(SWEEP_AXES)}}}")
    if cfg.start is None or cfg.end is None:
        raise ConfigError("sweep needs --start and --end")
    if cfg.steps < 1:
        raise ConfigError("steps must be >= 1")
    lo, hi = sorted((cfg.start, cfg.end))
    if cfg.axis == "s" and not (0 < lo and hi < 1):
        raise ConfigError("an s sweep must stay inside (0, 1)")
    if cfg.axis == "t" and lo < 0:
        raise ConfigError("potential scale t must be nonnegative")
    if cfg.axis == "p":
        _check_semilinear(cfg.params(), lo, cfg.lam)
        _check_semilinear(cfg.params(), hi, cfg.lam)
    if cfg.axis == "lambda":
        _check_semilinear(cfg.params(), cfg.p, lo)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _eigen_payload(cfg: RunConfig, V, s: float):
    es = solve(V, max(3, cfg.k), cfg.params(s))
    rep = qualitative_report(es, cfg.grid_size)
    flags = rep.theorem_flags()
    ok = V.monotone_nondecreasing and all(flags.values())
    return es, rep, flags, ok


def cmd_eigen(cfg: RunConfig):
    V = parse_potential(cfg.V)
    es, rep, flags, ok = _eigen_payload(cfg, V, cfg.s)
    result = {
        "sigmas": es.sigmas,
        "potential_certified_nondecreasing": V.monotone_nondecreasing,
        "qualitative": rep.as_dict(),
        "flags": flags,
        "status": "pass" if ok else "fail",
    }
    if not V.monotone_nondecreasing:
        result["note"] = "potential is not certified nondecreasing; the flags are reported but not claimed"
    return (EXIT_OK if ok else EXIT_FAIL), result


def cmd_groundstate(cfg: RunConfig):
    gs = ground_state(cfg.N, cfg.s, cfg.p, cfg.lam, cfg.params())
    result = {"summary": gs.summary(), "flags": gs.invariant_flags() if gs.converged else {}}
    if gs.linearized is not None:
        result["linearized"] = gs.linearized.as_dict()
    result["status"] = "pass" if gs.converged else "fail"
    return (EXIT_OK if gs.converged else EXIT_FAIL), result


def cmd_verify(cfg: RunConfig):
    from . import verify

    vcfg = verify.VerifyConfig(seed=cfg.seed, n_basis=cfg.n_basis, grid_size=cfg.grid_size)
    records = []
    for name in cfg.only or tuple(verify.SUITES):
        try:
            records.extend(r.as_dict() for r in verify.run(name, vcfg))
        except Exception as exc:  # keep the partial report
            records.append(dict(check_id=f"{name}.suite_error", paper_anchor="", status="error",
                                measured=f"{type(exc).__name__}: {exc}", tolerance=None))
    failed = sum(r["status"] != "pass" for r in records)
    result = {"passed": len(records) - failed, "failed": failed, "records": records}
    return (EXIT_FAIL if failed else EXIT_OK), result


def _sweep_values(cfg: RunConfig) -> list[float]:
    return sorted(float(v) for v in np.linspace(cfg.start, cfg.end, cfg.steps + 1))


def _sweep_row(cfg: RunConfig, value: float) -> dict:
    row = {cfg.axis: value}
    try:
        if cfg.axis in ("s", "t"):
            V = parse_potential(cfg.V)
            s = value if cfg.axis == "s" else cfg.s
            if cfg.axis == "t":
                V = V.scaled(value)
            es, rep, flags, ok = _eigen_payload(cfg, V, s)
            row.update(sigma1=rep.sigma1, sigma2=rep.sigma2, sigma3=rep.sigma3, sign_changes_w2=rep.sign_changes_w2,
                       hopf_value=rep.hopf_value, integral_sign_product=rep.integral_sign_product)
        else:
            p = value if cfg.axis == "p" else cfg.p
            lam = value if cfg.axis == "lambda" else cfg.lam
            gs = ground_state(cfg.N, cfg.s, p, lam, cfg.params())
            ok = gs.converged
            summ = gs.summary()
            summ.pop("lambda")
            summ.pop("p")
            row.update(summ)
        row["status"] = "pass" if ok else "fail"
    except Exception as exc:  # a failed row is recorded, the sweep goes on
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _workers() -> int:
    raw = os.environ.get("FRACLAB_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"FRACLAB_WORKERS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("FRACLAB_WORKERS must be >= 1")
    return n


def cmd_sweep(cfg: RunConfig):
    values = _sweep_values(cfg)
    workers = _workers()
    if workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(values))) as pool:
            rows = list(pool.map(_sweep_row, [cfg] * len(values), values))
    else:
        rows = [_sweep_row(cfg, v) for v in values]
    # pool.map already preserves order; sort anyway so the table never depends on scheduling
    rows.sort(key=lambda r: r[cfg.axis])
    bad = sum(r["status"] != "pass" for r in rows)
    return (EXIT_FAIL if bad else EXIT_OK), {"rows": rows, "failed_rows": bad}


def _extension_source(cfg: RunConfig):
    if cfg.ground:
        gs = ground_state(cfg.N, cfg.s, cfg.p, cfg.lam, cfg.params())
        if not gs.converged:
            raise RuntimeError("ground state did not converge")
        return "ground_state", gs.u
    es = solve(parse_potential(cfg.V), cfg.k, cfg.params())
    return f"w{cfg.k}", es.functions[cfg.k - 1]


def cmd_extend(cfg: RunConfig):
    label, w = _extension_source(cfg)
    r_grid, t_grid = default_grids(4.0, cfg.grid_size)
    field = poisson_extend(w, r_grid, t_grid)
    rep = nodal_domains(field)
    pN = frac_constants(cfg.N, cfg.s).p_Ns
    summary = {
        "source": label,
        "nodal_count": rep.count,
        "positive_domains": rep.positive,
        "negative_domains": rep.negative,
        "touches_bottom": list(rep.touches_bottom),
        "tail_moment": {_fmt(t): tail_moment(w, t) for t in TAIL_TIMES},
        "p_Ns_integral": pN * w.integral(),
        "extension_consistency": max(extension_consistency(w, x) for x in CONSISTENCY_PROBES),
    }
    return EXIT_OK, {"summary": summary, "field": field}


HANDLERS = {
    "eigen": cmd_eigen,
    "groundstate": cmd_groundstate,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "extend": cmd_extend,
}


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------


def _flatten(d: dict, prefix: str = ""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, (list, tuple, np.ndarray)) and not isinstance(v, str):
            for i, x in enumerate(_plain(v)):
                yield f"{key}[{i}]", x
        else:
            yield key, v


def render(cfg: RunConfig, result: dict) -> str:
    """Report text in the configured format."""
    if cfg.command == "extend":
        result = {"summary": result["summary"]}
    if cfg.format == "json":
        return dumps({"config": cfg.as_dict(), "result": result})
    if cfg.command == "verify":
        cols = ["check_id", "paper_anchor", "status", "measured", "tolerance"]
        return _csv_text(cols, ([r[c] for c in cols] for r in result["records"]))
    if cfg.command == "sweep":
        cols = []
        for row in result["rows"]:
            cols.extend(c for c in row if c not in cols)
        return _csv_text(cols, ([row.get(c) for c in cols] for row in result["rows"]))
    pairs = list(_flatten({"config": cfg.as_dict(), "result": result}))
    return _csv_text(["field", "value"], pairs)


def _write(path: str | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def execute(cfg: RunConfig) -> tuple[int, dict]:
    """Validate, run and return (exit code, result) without writing anything."""
    cfg = resolve(cfg)
    return HANDLERS[cfg.command](cfg)


def run_config(cfg: RunConfig) -> int:
    try:
        cfg = resolve(cfg)
    except ConfigError as exc:
        print(f"fraclab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, result = HANDLERS[cfg.command](cfg)
    if cfg.command == "extend":
        field = result["field"]
        csv_text = _csv_text(["r", "t", "W"], field.rows().tolist())
        if cfg.output_path is None:
            sys.stdout.write(csv_text)
            sys.stderr.write(render(cfg, result))
        else:
            Path(cfg.output_path).write_text(csv_text)
            Path(cfg.output_path + ".summary." + cfg.format).write_text(render(cfg, result))
        return code
    _write(cfg.output_path, render(cfg, result))
    return code


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--N", type=int, default=1, help="dimension")
    p.add_argument("--s", type=float, default=0.5, help="fractional order in (0, 1)")
    p.add_argument("--n-basis", type=int, default=32)
    p.add_argument("--quad-order", type=int, default=None)
    p.add_argument("--grid-size", type=int, default=None,
                   help="radial sign grid (eigen/verify/sweep, default 1024) or field cells (extend, default 200)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--config", default=None, help="re-run the config embedded in a JSON report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclab", description="Radial fractional Dirichlet problems on the unit ball.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="eigenpairs of (-Lap)^s + V and their sign structure")
    _common(p)
    p.add_argument("--V", default="0", help='potential, e.g. "10*r^2 + step(r-1/2)"')
    p.add_argument("--k", type=int, default=3, help="number of eigenpairs (at least 3 are computed)")

    p = sub.add_parser("groundstate", help="ground state of (-Lap)^s u + lambda u = u^p")
    _common(p)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)

    p = sub.add_parser("verify", help="run the verification suites")
    _common(p)
    p.add_argument("--only", action="append", default=[], help="suite name (repeatable)")

    p = sub.add_parser("sweep", help="table of eigen or ground-state diagnostics along one parameter")
    _common(p)
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--end", type=float, required=True)
    p.add_argument("--steps", type=int, default=8, help="number of intervals; steps + 1 rows")
    p.add_argument("--V", default="0")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)

    p = sub.add_parser("extend", help="Poisson-kernel extension of an eigenfunction or ground state")
    _common(p)
    p.add_argument("--k", type=int, default=2, help="extend w_k")
    p.add_argument("--V", default="0")
    p.add_argument("--ground-state", dest="ground", action="store_true", help="extend the ground state instead")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
            cfg = RunConfig.from_dict(data["config"])
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config from {args.config}: {exc}") from exc
        if cfg.command != args.command:
            raise ConfigError(f"report was produced by {cfg.command!r}, not {args.command!r}")
        return replace(cfg, output_path=args.out if args.out is not None else cfg.output_path)
    ns = vars(args)
    known = {f.name for f in fields(RunConfig)}
    kw = {k: v for k, v in ns.items() if k in known}
    kw["output_path"] = ns.get("out")
    kw["only"] = tuple(ns.get("only") or ())
    return RunConfig(**kw)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        cfg = _config_from_args(args)
    except (ConfigError, TypeError) as exc:
        print(f"fraclab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_config(cfg)


if __name__ == "__main__":
    sys.exit(main())
