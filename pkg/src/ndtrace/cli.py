"""Batch driver: parse a JSON run configuration, sweep identity checks over
spectral-parameter grids, and emit machine-readable CSV and JSON summaries.

Output files are deterministic for a fixed configuration: complex numbers
are written in shortest round-trip ``re±imi`` form, rows follow the input
order, and no timestamps or timings enter the data files.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .coeffs import CoefficientSet, preset, tabulated
from .errors import ConfigError, NdtraceError, SpectralPointError
from .fundmat import normalized_wronskian
from .jost import jost_frame_set
from .roots import compute_roots

SCHEMA_VERSION = 1

_COMMANDS = ("roots", "jost-dump", "wronskian", "trace-check", "det-check",
             "eig-count", "large-z")

_DEFAULT_TOLERANCES = {
    "defect_tol": 1e-9,
    "quad_tol": 1e-6,
    "z_step_rtol": 1e-8,
    "trace_rtol": 1e-5,
    "det_rtol": 1e-4,
    "large_z_slack": 0.3,
}

_CSV_COLUMNS = ("identity", "z", "lhs", "rhs", "abs_err", "rel_err",
                "truncation_estimate")

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def format_complex(value: complex) -> str:
    """Shortest round-trip ``re±imi`` representation."""
    value = complex(value)
    re, im = repr(value.real), repr(abs(value.imag))
    sign = "+" if value.imag >= 0 else "-"
    return f"{re}{sign}{im}i"


def parse_complex(raw) -> complex:
    """Accept numbers, [re, im] pairs, and ``a+bi`` / ``a+bj`` strings."""
    if isinstance(raw, (int, float)):
        return complex(raw)
    if isinstance(raw, (list, tuple)) and len(raw) == 2:
        return complex(float(raw[0]), float(raw[1]))
    if isinstance(raw, str):
        text = raw.strip().replace(" ", "").replace("i", "j")
        try:
            return complex(text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {raw!r}") from exc
    raise ConfigError(f"cannot parse complex number {raw!r}")


def _require_keys(mapping: dict, allowed: set, context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")


@dataclass
class RunConfig:
    """Validated run configuration."""

    order: int
    coefficients: CoefficientSet
    z_points: list
    window: float | None
    tolerances: dict
    commands: list
    csv_name: str
    summary_name: str
    contour: verify.Contour | None
    ray: complex
    magnitudes: list
    threads: int = 1

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be an object")
        _require_keys(raw, {"schema_version", "order", "coefficients",
                            "z_points", "window", "tolerances", "commands",
                            "output", "contour", "ray", "magnitudes"}, "config")
        if raw.get("schema_version") != SCHEMA_VERSION:
            raise ConfigError(
                f"schema_version must be {SCHEMA_VERSION}, got {raw.get('schema_version')}"
            )
        order = raw.get("order")
        if not isinstance(order, int) or order < 1:
            raise ConfigError("order must be an integer >= 1")

        cs = _parse_coefficients(order, raw.get("coefficients"))
        z_points = _parse_z_spec(raw.get("z_points"))

        window = raw.get("window")
        if window is not None:
            window = float(window)
            if window <= 0:
                raise ConfigError("window must be positive")

        tol = dict(_DEFAULT_TOLERANCES)
        user_tol = raw.get("tolerances", {})
        _require_keys(user_tol, set(_DEFAULT_TOLERANCES), "tolerances")
        tol.update({k: float(v) for k, v in user_tol.items()})
        if any(v <= 0 for v in tol.values()):
            raise ConfigError("tolerances must be positive")

        commands = raw.get("commands", [])
        if not isinstance(commands, list) or any(c not in _COMMANDS for c in commands):
            raise ConfigError(f"commands must be a list drawn from {_COMMANDS}")

        output = raw.get("output", {})
        _require_keys(output, {"csv", "summary"}, "output")

        contour = None
        if raw.get("contour") is not None:
            cdict = raw["contour"]
            _require_keys(cdict, {"center", "radius", "nodes"}, "contour")
            contour = verify.Contour(center=parse_complex(cdict["center"]),
                                     radius=float(cdict["radius"]),
                                     nodes=int(cdict.get("nodes", 128)))

        ray = parse_complex(raw.get("ray", [0.0, 1.0]))
        magnitudes = [float(m) for m in raw.get("magnitudes", [4.0, 32.0, 256.0])]

        cfg = cls(order=order, coefficients=cs, z_points=z_points,
                  window=window, tolerances=tol, commands=commands,
                  csv_name=output.get("csv", "results.csv"),
                  summary_name=output.get("summary", "summary.json"),
                  contour=contour, ray=ray, magnitudes=magnitudes)
        cfg.validate_z_points()
        return cfg

    def validate_z_points(self) -> None:
        """Every z must clear the admissible-region and root-floor checks."""
        for zp in self.z_points:
            try:
                compute_roots(self.order, zp)
            except SpectralPointError as exc:
                raise ConfigError(f"invalid spectral point {zp}: {exc}") from exc


def _parse_coefficients(order: int, spec) -> CoefficientSet:
    if not isinstance(spec, dict) or "preset" not in spec:
        raise ConfigError("coefficients must be an object with a 'preset' key")
    name = spec["preset"]
    params = {k: v for k, v in spec.items() if k != "preset"}
    if name == "table":
        _require_keys(params, {"path", "x", "values", "alpha"}, "coefficients")
        if "path" in params:
            try:
                table = json.loads(Path(params["path"]).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read coefficient table: {exc}") from exc
        else:
            table = params
        values = {int(k) - 1: [parse_complex(v) for v in vals]
                  for k, vals in table.get("values", {}).items()}
        return tabulated(order, table.get("x", []), values,
                         alpha=float(params.get("alpha", 1.0)))
    if name in ("bump", "gaussian"):
        if "amplitudes" in params:
            params["amplitudes"] = [parse_complex(a) for a in params["amplitudes"]]
    if name == "sech2" and "lam" in params:
        params["lam"] = parse_complex(params["lam"])
    try:
        return preset(name, order, **params)
    except NdtraceError as exc:
        raise ConfigError(f"invalid coefficient spec: {exc}") from exc
    except TypeError as exc:
        raise ConfigError(f"invalid coefficient parameters: {exc}") from exc


def _parse_z_spec(spec) -> list:
    if spec is None:
        return []
    if isinstance(spec, list):
        return [parse_complex(zp) for zp in spec]
    if isinstance(spec, dict):
        kind = spec.get("kind")
        if kind == "list":
            _require_keys(spec, {"kind", "points"}, "z_points")
            return [parse_complex(zp) for zp in spec["points"]]
        if kind == "ray":
            _require_keys(spec, {"kind", "direction", "magnitudes"}, "z_points")
            direction = parse_complex(spec["direction"])
            direction /= abs(direction)
            return [m * direction for m in spec["magnitudes"]]
        if kind == "rectangle":
            _require_keys(spec, {"kind", "re", "im", "n_re", "n_im"}, "z_points")
            res = np.linspace(spec["re"][0], spec["re"][1], int(spec["n_re"]))
            ims = np.linspace(spec["im"][0], spec["im"][1], int(spec["n_im"]))
            return [complex(a, b) for b in ims for a in res]
        raise ConfigError(f"unknown z grid kind {kind!r}")
    raise ConfigError("z_points must be a list or a grid object")


@dataclass
class CommandResult:
    identity: str
    rows: list = field(default_factory=list)   # dicts in CSV column order
    max_rel_err: float = 0.0
    passed: bool = True


def _report_row(rep) -> dict:
    z = rep.z if not isinstance(rep.z, tuple) else rep.z[-1]
    return {
        "identity": rep.identity,
        "z": format_complex(z),
        "lhs": format_complex(rep.lhs),
        "rhs": format_complex(rep.rhs),
        "abs_err": repr(rep.abs_err),
        "rel_err": repr(rep.rel_err),
        "truncation_estimate": repr(rep.truncation_estimate),
    }


def _map_ordered(fn, items, threads: int):
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _cmd_trace(cfg: RunConfig) -> CommandResult:
    def one(zp):
        return verify.trace_check(cfg.coefficients, zp, window=cfg.window,
                                  fd_rtol=cfg.tolerances["z_step_rtol"])

    reps = _map_ordered(one, cfg.z_points, cfg.threads)
    res = CommandResult(identity="trace_formula")
    res.rows = [_report_row(r) for r in reps]
    res.max_rel_err = max((r.rel_err for r in reps), default=0.0)
    res.passed = res.max_rel_err <= cfg.tolerances["trace_rtol"]
    return res


def _cmd_det(cfg: RunConfig) -> CommandResult:
    def one(zp):
        return verify.det_identity_check(cfg.coefficients, zp)

    reps = _map_ordered(one, cfg.z_points, cfg.threads)
    res = CommandResult(identity="det_identity")
    res.rows = [_report_row(r) for r in reps]
    res.max_rel_err = max((r.rel_err for r in reps), default=0.0)
    res.passed = res.max_rel_err <= cfg.tolerances["det_rtol"]
    return res


def _cmd_large_z(cfg: RunConfig) -> CommandResult:
    rep = verify.large_z_check(cfg.coefficients, ray=cfg.ray,
                               magnitudes=cfg.magnitudes)
    res = CommandResult(identity="large_z")
    zs = rep.z
    devs = rep.extra["deviations"]
    for zp, dev in zip(zs, devs):
        res.rows.append({
            "identity": "large_z",
            "z": format_complex(zp),
            "lhs": format_complex(1.0 + dev),
            "rhs": format_complex(1.0),
            "abs_err": repr(dev),
            "rel_err": repr(dev),
            "truncation_estimate": repr(0.0),
        })
    slope, ref = rep.lhs.real, rep.rhs.real
    res.max_rel_err = max(devs)
    res.passed = bool(rep.extra["decreasing"]
                      and slope <= ref + cfg.tolerances["large_z_slack"])
    return res


def _cmd_eig_count(cfg: RunConfig) -> CommandResult:
    if cfg.contour is None:
        raise ConfigError("eig-count needs a contour in the config")
    raw = verify.winding_number(cfg.coefficients, cfg.contour)
    count = verify.eig_count(cfg.coefficients, cfg.contour)
    res = CommandResult(identity="eig_count")
    res.rows.append({
        "identity": "eig_count",
        "z": format_complex(cfg.contour.center),
        "lhs": format_complex(raw),
        "rhs": format_complex(count),
        "abs_err": repr(abs(raw - count)),
        "rel_err": repr(abs(raw - count)),
        "truncation_estimate": repr(0.0),
    })
    res.max_rel_err = abs(raw - count)
    res.passed = True
    return res


def _cmd_roots(cfg: RunConfig) -> CommandResult:
    """One row per root: lhs is the root, rhs the target N-th power, the
    error columns carry the power-law residual."""
    res = CommandResult(identity="roots")
    from .roots import i_pow

    for zp in cfg.z_points:
        rs = compute_roots(cfg.order, zp)
        target = i_pow(cfg.order) * zp
        for zeta in rs.roots:
            resid = abs(zeta ** cfg.order - target)
            res.rows.append({
                "identity": "roots",
                "z": format_complex(zp),
                "lhs": format_complex(zeta),
                "rhs": format_complex(target),
                "abs_err": repr(resid),
                "rel_err": repr(resid / abs(target)),
                "truncation_estimate": repr(0.0),
            })
    return res


def _cmd_wronskian(cfg: RunConfig) -> CommandResult:
    res = CommandResult(identity="wronskian")
    for zp in cfg.z_points:
        d = verify.delta_fn(cfg.coefficients)(zp)
        res.rows.append({
            "identity": "wronskian",
            "z": format_complex(zp),
            "lhs": format_complex(d),
            "rhs": format_complex(1.0),
            "abs_err": repr(abs(d - 1.0)),
            "rel_err": repr(abs(d - 1.0)),
            "truncation_estimate": repr(0.0),
        })
    return res


def _cmd_jost_dump(cfg: RunConfig, out_dir: Path) -> CommandResult:
    res = CommandResult(identity="jost_dump")
    path = out_dir / "jost.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["z", "j", "side", "x"]
                        + [f"w_{k}" for k in range(cfg.order)])
        for zp in cfg.z_points:
            rs = compute_roots(cfg.order, zp)
            window = cfg.window or 6.0
            js = jost_frame_set(rs, cfg.coefficients, -window, window)
            for sol in js:
                for i, x in enumerate(sol.grid):
                    writer.writerow([format_complex(zp), sol.j, sol.side, repr(float(x))]
                                    + [format_complex(v) for v in sol.w_samples[:, i]])
    res.rows = []
    return res


def run(config: RunConfig, out_dir: str = ".") -> int:
    """Execute the configured commands; returns the process exit code."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dispatch = {
        "trace-check": _cmd_trace,
        "det-check": _cmd_det,
        "large-z": _cmd_large_z,
        "eig-count": _cmd_eig_count,
        "roots": _cmd_roots,
        "wronskian": _cmd_wronskian,
    }
    results = []
    try:
        for command in config.commands:
            if command == "jost-dump":
                results.append(_cmd_jost_dump(config, out))
            else:
                results.append(dispatch[command](config))
    except ConfigError:
        raise
    except NdtraceError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL

    rows = [row for res in results for row in res.rows]
    with (out / config.csv_name).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    summary = [{"identity": res.identity, "n_points": len(res.rows),
                "max_rel_err": res.max_rel_err, "pass": res.passed}
               for res in results]
    (out / config.summary_name).write_text(json.dumps(summary, indent=2) + "\n")

    return EXIT_OK if all(res.passed for res in results) else EXIT_TOLERANCE


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ndtrace",
        description="trace-formula and determinant-identity verification "
                    "for one-dimensional differential operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS + ("run",):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    try:
        cfg = RunConfig.from_file(args.config)
        cfg.threads = max(1, args.threads)
        if args.command != "run":
            cfg.commands = [args.command]
        elif not cfg.commands:
            raise ConfigError("run requires a non-empty 'commands' list")
        return run(cfg, args.out)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
