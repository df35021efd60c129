"""Command-line front end.

Subcommands: spectral | apx | besicovitch | verify | zeta.  A run is
described by a JSON config file (nested sections, documented in the
README) plus a few flag overrides.  Exit codes: 0 pass, 1 check failure,
2 config error, 3 regime/cutoff/capacity error.

Outputs are deterministic: CSV files carry a self-describing header row
and a config-hash comment; JSON reports use canonical key order.  Wall
time and thread count are logged to stderr only, never written into an
output file, so identical config + seed gives byte-identical files at
any --threads value.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import apx, geometry, harness, spectra, zeta
from ._numutil import config_hash, fmt17, log_grid
from .errors import (
    CapacityError,
    ConfigError,
    ConjugatePointError,
    CutoffExceededError,
    RegimeError,
    ResolutionError,
)

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_REGIME = 3


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as e:
        raise ConfigError(f"config file not found: {path}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    return cfg


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config field: {key}")
    return cfg[key]


def manifold_from_config(cfg: dict) -> geometry.ModelManifold:
    spec = _require(cfg, "manifold")
    variant = _require(spec, "variant")
    if variant == "circle":
        return geometry.Circle()
    if variant == "square_torus":
        return geometry.SquareTorus(int(_require(spec, "n")))
    if variant == "flat_torus2":
        return geometry.FlatTorus2(np.array(_require(spec, "basis"), dtype=float))
    if variant == "sphere":
        return geometry.Sphere(int(_require(spec, "n")))
    if variant == "euclidean":
        return geometry.Euclidean(int(_require(spec, "n")))
    raise ConfigError(f"unknown manifold variant: {variant}")


def pair_from_config(cfg: dict, manifold):
    spec = _require(cfg, "pair")
    if isinstance(manifold, geometry.Circle):
        return float(_require(spec, "d"))
    if isinstance(manifold, (geometry.SquareTorus, geometry.FlatTorus2)):
        return np.array(_require(spec, "displacement"), dtype=float)
    if isinstance(manifold, geometry.Sphere):
        return float(_require(spec, "s"))
    if isinstance(manifold, geometry.Euclidean):
        return float(_require(spec, "d"))
    raise ConfigError("no pair specification for this manifold")


def grid_from_config(spec: dict) -> np.ndarray:
    kind = spec.get("scale", "linear")
    lo, hi, count = float(spec["start"]), float(spec["stop"]), int(spec["count"])
    if count < 1 or hi < lo:
        raise ConfigError(f"bad grid: {spec}")
    if kind == "log":
        return log_grid(lo, hi, count)
    if kind == "linear":
        return np.linspace(lo, hi, count)
    raise ConfigError(f"unknown grid scale: {kind}")


def _series_from_config(cfg, manifold, pair, lambda_max):
    if isinstance(manifold, geometry.Circle):
        return spectra.build_series_circle(pair, lambda_max)
    if isinstance(manifold, (geometry.SquareTorus, geometry.FlatTorus2)):
        return spectra.build_series_torus(geometry.lattice_for(manifold), pair, lambda_max)
    if isinstance(manifold, geometry.Sphere):
        return spectra.build_series_sphere(manifold.n, pair, lambda_max)
    raise ConfigError("spectral series need a compact manifold")


def write_csv(path: Path, header: list[str], rows, cfg_hash: str):
    lines = [f"# lapspec config_hash={cfg_hash}", ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt17(v) if isinstance(v, float) else str(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _outdir(cfg, args) -> Path:
    out = Path(args.out or cfg.get("output", {}).get("dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Subcommands


def cmd_spectral(cfg: dict, args) -> int:
    manifold = manifold_from_config(cfg)
    pair = pair_from_config(cfg, manifold)
    grid = grid_from_config(_require(_require(cfg, "grids"), "lambda"))
    lambda_max = float(cfg.get("cutoffs", {}).get("lambda_max", grid.max()))
    if grid.max() > lambda_max * (1 + 1e-12):
        raise CutoffExceededError("lambda grid exceeds configured lambda_max")
    series = _series_from_config(cfg, manifold, pair, lambda_max)
    n = series.n
    dist = series.distance
    rows = []
    for lam in grid:
        nval = spectra.evaluate_N(series, float(lam))
        resc = float(lam) ** ((1 - n) / 2.0) * nval
        eucl = spectra.euclidean_N(n, dist, float(lam)) if lam > 0 else 0.0
        rows.append((float(lam), nval, resc, eucl))
    out = _outdir(cfg, args)
    write_csv(out / "spectral.csv", ["lambda", "N", "N_rescaled", "N_euclid"], rows,
              config_hash(cfg))
    return EXIT_PASS


def cmd_apx(cfg: dict, args) -> int:
    manifold = manifold_from_config(cfg)
    pair = pair_from_config(cfg, manifold)
    cut = cfg.get("cutoffs", {})
    T = float(_require(cut, "T"))
    qs = cut.get("Q", [])
    if not qs:
        raise ConfigError("cutoffs.Q must be a non-empty list for apx scans")
    series = _series_from_config(cfg, manifold, pair, T)
    spu = 8.0 * max(float(max(qs)), 1.0) / (2 * math.pi)
    rows = []
    for q in qs:
        if isinstance(manifold, geometry.Sphere):
            segs = geometry.geodesics_sphere(
                manifold.n, pair, int(math.ceil(float(q) / (2 * math.pi))) + 1
            )
        elif isinstance(manifold, geometry.Circle):
            segs = geometry.geodesics_torus(geometry.square_lattice(1), [pair], float(q))
        else:
            segs = geometry.geodesics_torus(
                geometry.lattice_for(manifold), pair, float(q)
            )
        expansion = apx.expansion_from_geodesics(segs, manifold.n, float(q))
        resid = apx.b2_residual(series, expansion, T)
        est = apx.besicovitch_seminorm(
            lambda lam: lam ** ((1 - series.n) / 2.0) * spectra.evaluate_N(series, lam)
            - apx.eval_expansion(expansion, lam),
            p=2.0, T=T, samples_per_unit=spu,
            max_frequency=max(expansion.max_frequency, 1.0),
        )
        history = ";".join(fmt17(v) for _, v in est.history)
        rows.append((float(T), float(q), resid, history))
    out = _outdir(cfg, args)
    write_csv(out / "apx_residuals.csv", ["T", "Q", "residual", "seminorm_history"],
              rows, config_hash(cfg))
    return EXIT_PASS


def cmd_besicovitch(cfg: dict, args) -> int:
    manifold = manifold_from_config(cfg)
    pair = pair_from_config(cfg, manifold)
    cut = cfg.get("cutoffs", {})
    T = float(_require(cut, "T"))
    p = float(cfg.get("seminorm", {}).get("p", 2.0))
    q = float(_require(cut, "Q")) if not isinstance(cut.get("Q"), list) else float(cut["Q"][-1])
    series = _series_from_config(cfg, manifold, pair, T)
    if isinstance(manifold, geometry.Sphere):
        segs = geometry.geodesics_sphere(manifold.n, pair, int(q / (2 * math.pi)) + 1)
    elif isinstance(manifold, geometry.Circle):
        segs = geometry.geodesics_torus(geometry.square_lattice(1), [pair], q)
    else:
        segs = geometry.geodesics_torus(geometry.lattice_for(manifold), pair, q)
    expansion = apx.expansion_from_geodesics(segs, manifold.n, q)
    est = apx.besicovitch_seminorm(
        lambda lam: lam ** ((1 - series.n) / 2.0) * spectra.evaluate_N(series, lam)
        - apx.eval_expansion(expansion, lam),
        p=p, T=T,
        samples_per_unit=8.0 * max(expansion.max_frequency, 1.0) / (2 * math.pi),
        max_frequency=max(expansion.max_frequency, 1.0),
    )
    rows = [(h, v) for h, v in est.history]
    out = _outdir(cfg, args)
    write_csv(out / "besicovitch.csv", ["T_horizon", "seminorm"], rows, config_hash(cfg))
    return EXIT_PASS


def _default_verify_checks() -> list[str]:
    return ["manifold_average", "weighted_average", "lower_bound", "log_divergence"]


def cmd_verify(cfg: dict, args) -> int:
    manifold = manifold_from_config(cfg)
    vcfg = cfg.get("verify", {})
    checks = vcfg.get("checks", _default_verify_checks())
    if not checks:
        raise ConfigError("verify.checks must not be empty")
    threads = args.threads
    out = _outdir(cfg, args)
    x = vcfg.get("x", [0.0, 0.0])
    euclid_scale = float(vcfg.get("euclid_scale", 1.0))
    reports = []
    for check in checks:
        if check == "manifold_average":
            grid = grid_from_config(vcfg.get("lambda", {"start": 1, "stop": 120, "count": 13, "scale": "log"}))
            g = int(vcfg.get("grid", 512))
            rule = (harness.torus_rule(manifold, g)
                    if manifold.n == 2 and not isinstance(manifold, geometry.Sphere)
                    else harness.sphere_rule(manifold.n, g))
            rep = harness.verify_manifold_average(
                manifold, x, grid, rule, euclid_scale=euclid_scale, threads=threads
            )
        elif check == "weighted_average":
            grid = grid_from_config(vcfg.get("lambda_weighted", {"start": 50, "stop": 120, "count": 9, "scale": "log"}))
            g = int(vcfg.get("grid", 512))
            rule = (harness.torus_rule(manifold, g)
                    if manifold.n == 2 and not isinstance(manifold, geometry.Sphere)
                    else harness.sphere_rule(manifold.n, g))
            rep = harness.verify_weighted_average(
                manifold, x, vcfg.get("kappas", [0.0, 0.5, 1.0, 2.0]), grid, rule,
                threads=threads,
            )
        elif check == "lower_bound":
            pm = vcfg.get("lower_bound", {})
            grid = log_grid(float(pm.get("start", 10.0)), float(pm.get("stop", 1e4)), int(pm.get("count", 60)))
            rep = harness.verify_lower_bound(
                geometry.Circle(), float(pm.get("d", 1.0)),
                float(pm.get("q", 0.0)), float(pm.get("p", 1.0)), grid,
            )
        elif check == "log_divergence":
            pm = vcfg.get("log_divergence", {})
            rep = harness.log_divergence_check(
                geometry.Circle(), float(pm.get("d", 1.0)), float(pm.get("lambda_max", 1e4))
            )
        else:
            raise ConfigError(f"unknown verify check: {check}")
        rep.meta["config_hash"] = config_hash(cfg)
        rep.save(out / f"report_{check}.json")
        reports.append(rep)
    ok = all(r.passed() for r in reports)
    for r in reports:
        print(f"{r.scan_id}: {'PASS' if r.passed() else 'FAIL'} {r.flags}")
    return EXIT_PASS if ok else EXIT_CHECK_FAILED


def cmd_zeta(cfg: dict, args) -> int:
    manifold = manifold_from_config(cfg)
    pair = pair_from_config(cfg, manifold)
    zcfg = cfg.get("zeta", {})
    t = float(zcfg.get("t", 1.5))
    s_spec = zcfg.get("s", {"start": -50.0, "stop": 50.0, "count": 41})
    s_grid = grid_from_config(s_spec)
    tol = float(zcfg.get("tol", 1e-6))
    if isinstance(manifold, geometry.Circle):
        scan = zeta.zeta_growth_scan(pair, t, s_grid, tol=tol, threads=args.threads)
    else:
        lambda_max = float(cfg.get("cutoffs", {}).get("lambda_max", 300.0))
        series = _series_from_config(cfg, manifold, pair, lambda_max)
        scan = zeta.zeta_growth_scan(series, t, s_grid, tol=tol, threads=args.threads)
    out = _outdir(cfg, args)
    rows = [
        (float(s), v.real, v.imag, abs(v), float(b))
        for s, v, b in zip(scan.s_grid, scan.values, scan.tail_bounds)
    ]
    write_csv(out / "zeta_scan.csv", ["s", "re_Z", "im_Z", "abs_Z", "tail_bound"],
              rows, config_hash(cfg))
    summary = {
        "t": scan.t,
        "fit": scan.fit.as_dict() if scan.fit else None,
        "predicted_exponent": scan.predicted_exponent,
        "advisory": scan.advisory,
        "config_hash": config_hash(cfg),
    }
    (out / "zeta_fit.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1) + "\n"
    )
    return EXIT_PASS


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="lapspec",
        description="spectral-function laboratory: scans, expansions, zeta growth",
    )
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("spectral", "apx", "besicovitch", "verify", "zeta"):
        sub.add_parser(name)
    args = parser.parse_args(argv)
    handlers = {
        "spectral": cmd_spectral,
        "apx": cmd_apx,
        "besicovitch": cmd_besicovitch,
        "verify": cmd_verify,
        "zeta": cmd_zeta,
    }
    start = time.time()
    try:
        cfg = load_config(args.config)
        code = handlers[args.command](cfg, args)
    except (ConfigError, KeyError, TypeError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegimeError, CutoffExceededError, CapacityError, ResolutionError,
            ConjugatePointError) as e:
        print(f"regime/cutoff error: {e}", file=sys.stderr)
        return EXIT_REGIME
    print(f"# elapsed {time.time() - start:.2f}s threads={args.threads}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
