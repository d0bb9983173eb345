"""Command-line driver.

    bregquant quantize    --config run.json --out DIR [--seed N]
    bregquant verify      --config run.json --codebook codebook.csv --out DIR
    bregquant reconstruct --config run.json --out DIR
    bregquant quantize2d  --config run2d.json --out DIR [--seed N]

Exit status: 0 on success, 2 when the solver hit ``max_iter`` (artifacts are
still written), 1 on unreadable or invalid input.  ``BREGQUANT_THREADS``
caps the number of BLAS/OpenMP threads.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .distortion import cell_integrals, distortion, prepare
from .distribution import Gaussian2D, density_from_spec, sample_2d, working_density
from .divergence import CATALOG_KINDS, from_spec
from .errors import BregquantError, NotConverged
from .geometry1d import Codebook1D
from .quadrature import QuadratureConfig
from .quant2d import divergence2d_from_spec, lloyd2d
from .solver import SolverConfig, lloyd, weighted_lloyd
from .verify import verify_codebook

log = logging.getLogger("bregquant")

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_DIVERGENCE = {
    "type": "object",
    "properties": {"kind": {"enum": list(CATALOG_KINDS)}, "a": _NUM, "lam": _NUM},
    "required": ["kind"],
    "additionalProperties": False,
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "divergence": _DIVERGENCE,
        "distribution": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["Gaussian", "Uniform", "TruncatedGaussian"]},
                "mu": _NUM, "sigma": _POS, "a": _NUM, "b": _NUM, "lo": _NUM, "hi": _NUM,
                "tail_mass": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "divergence2d": {
            "type": "object",
            "properties": {
                "kind": {"enum": ["SquaredNorm2", "Mahalanobis", "AdditiveMarginal"]},
                "S": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                 "minItems": 2, "maxItems": 2},
                      "minItems": 2, "maxItems": 2},
                "marginals": {"oneOf": [_DIVERGENCE, {"type": "array", "items": _DIVERGENCE,
                                                      "minItems": 2, "maxItems": 2}]},
            },
            "required": ["kind"],
            "additionalProperties": False,
        },
        "samples2d": {
            "type": "object",
            "properties": {
                "mean": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                "cov": {"type": "array", "items": {"type": "array", "items": _NUM,
                                                   "minItems": 2, "maxItems": 2},
                        "minItems": 2, "maxItems": 2},
                "positive_quadrant": {"type": "boolean"},
                "count": {"type": "integer", "minimum": 1},
            },
            "required": ["count"],
            "additionalProperties": False,
        },
        "n": {"type": "integer", "minimum": 1},
        "r": {"type": "number", "minimum": 2},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "solver": {
            "type": "object",
            "properties": {
                "max_iter": {"type": "integer", "minimum": 0},
                "code_tol": _POS,
                "residual_tol": _POS,
                "damping": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "init": {"oneOf": [{"const": "Quantiles"},
                                   {"type": "array", "items": _NUM, "minItems": 1}]},
            },
            "additionalProperties": False,
        },
        "quadrature": {
            "type": "object",
            "properties": {
                "abs_tol": _POS,
                "rel_tol": _POS,
                "max_depth": {"type": "integer", "minimum": 1},
                "base_rule": {"enum": ["GaussLegendre15", "Simpson"]},
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {k: {"type": "string", "minLength": 1} for k in
                           ("codebook", "report", "verification", "reconstruction",
                            "codes2d", "assignments2d")},
            "additionalProperties": False,
        },
    },
    "required": ["n"],
}

DEFAULT_OUTPUT = {
    "codebook": "codebook.csv",
    "report": "report.json",
    "verification": "verification.json",
    "reconstruction": "reconstruction.csv",
    "codes2d": "codes2d.csv",
    "assignments2d": "assignments2d.csv",
}

_REQUIRED = {
    "quantize": ("divergence", "distribution"),
    "verify": ("divergence", "distribution"),
    "reconstruct": ("divergence", "distribution"),
    "quantize2d": ("divergence2d", "samples2d"),
}


class ConfigError(Exception):
    pass


def load_config(path: str | Path, command: str) -> dict:
    """Read and validate a run configuration; raises ``ConfigError``."""
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    missing = [k for k in _REQUIRED[command] if k not in cfg]
    if missing:
        raise ConfigError(f"{command} needs config field(s) {missing}")
    return cfg


def _fmt(v) -> str:
    return "%.12g" % v


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, np.integer, str)) else _fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _write_json(path: Path, payload: dict):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=False)
        fh.write("\n")


def _solver_config(cfg: dict) -> SolverConfig:
    s = dict(cfg.get("solver", {}))
    return SolverConfig(**s)


def _quadrature(cfg: dict) -> QuadratureConfig:
    return QuadratureConfig(**cfg.get("quadrature", {}))


def _outputs(cfg: dict, out: Path) -> dict:
    names = {**DEFAULT_OUTPUT, **cfg.get("output", {})}
    return {k: out / v for k, v in names.items()}


def _build_1d(cfg: dict):
    fn = from_spec(cfg["divergence"])
    d = density_from_spec(cfg["distribution"])
    return fn, d


def _solve_1d(cfg: dict):
    """Run the solver; returns ``(fn, d, codebook, cuts, trace, converged)``."""
    fn, d = _build_1d(cfg)
    q, scfg = _quadrature(cfg), _solver_config(cfg)
    r = float(cfg.get("r", 2.0))
    try:
        if r == 2.0:
            cb, cl, trace = lloyd(fn, d, cfg["n"], q, scfg)
        else:
            cb, cl, trace = weighted_lloyd(fn, d, cfg["n"], r, q, scfg)
        return fn, d, cb, cl, trace, True
    except NotConverged as exc:
        log.warning("%s", exc)
        return fn, d, exc.codes, exc.cuts, exc.trace, False


def _codebook_rows(fn, d, cb, r, q):
    wd, cl = prepare(fn, d, cb)
    x = cb.codes
    wmass, wmom, _ = cell_integrals(fn, wd, x, cl.cuts, r, q, weighted=r != 2.0)
    plain = cell_integrals(fn, wd, x, cl.cuts, 2.0, q)[0] if r != 2.0 else wmass
    centre = wmom / wmass
    rows = [(i + 1, x[i], cl.cuts[i], cl.cuts[i + 1], plain[i], centre[i], abs(x[i] - centre[i]))
            for i in range(x.size)]
    return rows, cl, plain


def _quantize_artifacts(cfg, out: Path, seed):
    fn, d, cb, cl, trace, ok = _solve_1d(cfg)
    q = _quadrature(cfg)
    r = float(cfg.get("r", 2.0))
    paths = _outputs(cfg, out)
    rows, cl, mass = _codebook_rows(fn, d, cb, r, q)
    _write_csv(paths["codebook"],
               ("index", "code", "cut_left", "cut_right", "mass", "cond_mean", "residual"), rows)
    rep = distortion(fn, d, cb, r, q)
    ver = verify_codebook(fn, d, cb, q, r=r)
    _write_json(paths["report"], {
        "divergence": fn.to_spec(),
        "distribution": cfg["distribution"],
        "working_support": list(working_density(d).support),
        "n": cb.n,
        "r": r,
        "seed": seed,
        "converged": ok,
        "distortion": rep.g,
        "e_rn": rep.e,
        "codes": cb.codes,
        "verification": ver.to_dict(),
        "trace": trace.to_dict(),
    })
    return fn, d, cb, cl, mass, ok, paths


def cmd_quantize(cfg: dict, out: Path, seed) -> int:
    ok = _quantize_artifacts(cfg, out, seed)[5]
    return 0 if ok else 2


def cmd_reconstruct(cfg: dict, out: Path, seed) -> int:
    fn, d, cb, cl, mass, ok, paths = _quantize_artifacts(cfg, out, seed)
    est = mass / cl.widths
    _write_csv(paths["reconstruction"], ("index", "code", "density_estimate"),
               [(i + 1, cb.codes[i], est[i]) for i in range(cb.n)])
    return 0 if ok else 2


def read_codebook(path: str | Path) -> Codebook1D:
    """Codes from a CSV with a ``code`` column (or a single unnamed column)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ConfigError(f"empty codebook file {path}")
    header = [h.strip() for h in rows[0]]
    if "code" in header:
        col, body = header.index("code"), rows[1:]
    else:
        col, body = 0, rows
    try:
        codes = [float(r[col]) for r in body if r]
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"cannot parse codebook {path}: {exc}") from exc
    return Codebook1D(codes)


def cmd_verify(cfg: dict, out: Path, codebook: str) -> int:
    fn, d = _build_1d(cfg)
    try:
        cb = read_codebook(codebook)
    except OSError as exc:
        raise ConfigError(f"cannot read codebook {codebook}: {exc}") from exc
    q = _quadrature(cfg)
    r = float(cfg.get("r", 2.0))
    ver = verify_codebook(fn, d, cb, q, r=r)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(_outputs(cfg, out)["verification"], ver.to_dict())
    return 0


def cmd_quantize2d(cfg: dict, out: Path, seed) -> int:
    dv = divergence2d_from_spec(cfg["divergence2d"])
    s = cfg["samples2d"]
    desc = Gaussian2D(
        mean=tuple(s.get("mean", (0.5, 1.0))),
        cov=tuple(tuple(row) for row in s.get("cov", ((0.25, 0.0), (0.0, 0.25)))),
        positive_quadrant=bool(s.get("positive_quadrant", False)),
    )
    seed = 0 if seed is None else seed
    samples = sample_2d(desc, s["count"], seed)
    scfg = SolverConfig(**{"max_iter": 10_000, **cfg.get("solver", {})})
    ok = True
    try:
        cb, trace = lloyd2d(dv, samples, cfg["n"], seed, scfg)
    except NotConverged as exc:
        log.warning("%s", exc)
        cb, trace, ok = exc.codes, exc.trace, False
    paths = _outputs(cfg, out)
    counts = np.bincount(cb.assignment, minlength=cb.n)
    _write_csv(paths["codes2d"], ("index", "x", "y", "count"),
               [(k + 1, cb.codes[k, 0], cb.codes[k, 1], int(counts[k])) for k in range(cb.n)])
    _write_csv(paths["assignments2d"], ("sample", "x", "y", "code"),
               [(i + 1, p[0], p[1], int(a) + 1) for i, (p, a) in enumerate(zip(samples.points, cb.assignment))])
    _write_json(paths["report"], {
        "divergence2d": dv.to_spec(),
        "samples2d": {**desc.to_spec(), "count": s["count"]},
        "n": cb.n,
        "seed": seed,
        "converged": ok,
        "distortion": trace.distortion[-1],
        "trace": trace.to_dict(),
    })
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bregquant", description="Bregman optimal quantization")
    p.add_argument("command", choices=("quantize", "verify", "reconstruct", "quantize2d"))
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--codebook", help="codebook CSV (verify only)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _limit_threads():
    n = os.environ.get("BREGQUANT_THREADS")
    if not n:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(n))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    _limit_threads()
    if args.command == "verify" and not args.codebook:
        print("error: verify needs --codebook", file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config, args.command)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        out = Path(args.out)
        if args.command == "verify":
            return cmd_verify(cfg, out, args.codebook)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "quantize":
            return cmd_quantize(cfg, out, seed)
        if args.command == "reconstruct":
            return cmd_reconstruct(cfg, out, seed)
        return cmd_quantize2d(cfg, out, seed)
    except (ConfigError, BregquantError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
