"""Command-line front end.

Subcommands: ml, relax, verify, diffuse, invert, bench.  Each file-based
command reads a strictly validated JSON config (unknown keys are
rejected before any computation) and writes CSV/JSON artifacts with
full round-trip precision into the configured output directory, which
the GENFRAC_OUT environment variable overrides.

Exit codes: 0 success, 1 validation failure, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import ValidationError

from .diffusion import Domain1D, SpectralField, project, solve_direct_many, synthesize
from .errors import AccuracyError, ConfigError, DomainError, GenfracError
from .expressions import compile_expression
from .inverse_source import (
    InverseProblem,
    bound_constants,
    forward_map,
    reconstruct,
)
from .kernels import kernel_from_json, validate_admissibility
from .laplace import ContourConfig, invert
from .mittag_leffler import ml
from .relaxation import check_theorem_properties, sample_solutions

_KERNEL_SCHEMA = {
    "type": "object",
    "properties": {
        "type": {"enum": ["single", "multi", "distributed-uniform", "custom"]},
        "alpha": {"type": "number"},
        "terms": {
            "type": "array",
            "items": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
            "minItems": 1,
        },
        "g_expr": {"type": "string"},
    },
    "required": ["type"],
    "additionalProperties": False,
}

_ILT_FIELDS = {
    "ilt_method": {"enum": ["fixed-talbot", "hyperbolic"]},
    "ilt_nodes": {"type": "integer", "minimum": 8},
    "ilt_tol": {"type": "number", "exclusiveMinimum": 1e-14, "exclusiveMaximum": 1e-2},
}

_RELAX_SCHEMA = {
    "type": "object",
    "properties": {
        "kernel": _KERNEL_SCHEMA,
        "lambda": {"type": "number", "exclusiveMinimum": 0},
        "t_start": {"type": "number", "exclusiveMinimum": 0},
        "t_stop": {"type": "number", "exclusiveMinimum": 0},
        "t_points": {"type": "integer", "minimum": 2},
        "output_dir": {"type": "string"},
        **_ILT_FIELDS,
    },
    "required": ["kernel", "lambda", "t_start", "t_stop", "t_points"],
    "additionalProperties": False,
}

_VERIFY_SCHEMA = {
    "type": "object",
    "properties": {
        "kernel": _KERNEL_SCHEMA,
        "lambda1": {"type": "number", "exclusiveMinimum": 0},
        "lambdas": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0},
            "minItems": 1,
        },
        "T": {"type": "number", "exclusiveMinimum": 0},
        "t_start": {"type": "number", "exclusiveMinimum": 0},
        "t_stop": {"type": "number", "exclusiveMinimum": 0},
        "t_points": {"type": "integer", "minimum": 32},
        "output_dir": {"type": "string"},
        **_ILT_FIELDS,
    },
    "required": ["kernel", "lambda1", "lambdas", "T"],
    "additionalProperties": False,
}

_DIFFUSE_SCHEMA = {
    "type": "object",
    "properties": {
        "kernel": _KERNEL_SCHEMA,
        "length": {"type": "number", "exclusiveMinimum": 0},
        "n_modes": {"type": "integer", "minimum": 1},
        "times": {
            "type": "array",
            "items": {"type": "number", "minimum": 0},
            "minItems": 1,
        },
        "initial": {
            "oneOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "properties": {"expr": {"type": "string"}},
                    "required": ["expr"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "coeffs": {"type": "array", "items": {"type": "number"}}
                    },
                    "required": ["coeffs"],
                    "additionalProperties": False,
                },
            ]
        },
        "source_expr": {"type": ["string", "null"]},
        "x_points": {"type": "integer", "minimum": 3},
        "output_dir": {"type": "string"},
        **_ILT_FIELDS,
    },
    "required": ["kernel", "length", "n_modes", "times"],
    "additionalProperties": False,
}

_INVERT_SCHEMA = {
    "type": "object",
    "properties": {
        "kernel": _KERNEL_SCHEMA,
        "length": {"type": "number", "exclusiveMinimum": 0},
        "n_modes": {"type": "integer", "minimum": 1},
        "q_expr": {"type": "string"},
        "q0": {"type": "number", "exclusiveMinimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "observation": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "coeffs": {"type": "array", "items": {"type": "number"}}
                    },
                    "required": ["coeffs"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "truth_expr": {"type": "string"},
                        "truth_coeffs": {"type": "array", "items": {"type": "number"}},
                        "noise_level": {"type": "number", "minimum": 0},
                    },
                    "required": ["noise_level"],
                    "additionalProperties": False,
                },
            ]
        },
        "cutoff": {"type": ["integer", "null"], "minimum": 0},
        "seed": {"type": "integer"},
        "x_points": {"type": "integer", "minimum": 3},
        "output_dir": {"type": "string"},
        **_ILT_FIELDS,
    },
    "required": ["kernel", "length", "n_modes", "q_expr", "q0", "T",
                 "observation", "seed"],
    "additionalProperties": False,
}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _load_config(path: str, schema: dict) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        Draft202012Validator(schema).validate(doc)
    except ValidationError as exc:
        raise ConfigError(f"config {path} invalid: {exc.message}") from exc
    return doc


def _contour_from(doc: dict) -> ContourConfig:
    return ContourConfig(
        method=doc.get("ilt_method", "fixed-talbot"),
        nodes=doc.get("ilt_nodes", 48),
        working_tolerance=doc.get("ilt_tol", 1e-7),
    )


def _out_dir(doc: dict) -> Path:
    override = os.environ.get("GENFRAC_OUT")
    path = Path(override) if override else Path(doc.get("output_dir", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path: Path, doc) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _admissible_or_die(kernel) -> None:
    report = validate_admissibility(kernel)
    if not report.admissible:
        raise ConfigError(
            "kernel failed admissibility checks: " + "; ".join(report.failures)
        )


# ----------------------------------------------------------------------
# subcommands


def _cmd_ml(args) -> int:
    value = ml(args.alpha, args.beta, args.z)
    print(_fmt(value))
    return 0


def _cmd_relax(args) -> int:
    doc = _load_config(args.config, _RELAX_SCHEMA)
    kernel = kernel_from_json(doc["kernel"])
    _admissible_or_die(kernel)
    cfg = _contour_from(doc)
    grid = np.geomspace(doc["t_start"], doc["t_stop"], doc["t_points"])
    sol = sample_solutions(kernel, doc["lambda"], grid, cfg)
    out = _out_dir(doc) / "relaxation.csv"
    _write_csv(out, ["t", "u", "v", "err_u", "err_v"],
               zip(sol.t_grid, sol.u_values, sol.v_values, sol.err_u, sol.err_v))
    print(f"wrote {out}")
    return 0


def _cmd_verify(args) -> int:
    doc = _load_config(args.config, _VERIFY_SCHEMA)
    kernel = kernel_from_json(doc["kernel"])
    _admissible_or_die(kernel)
    cfg = _contour_from(doc)
    T = doc["T"]
    grid = np.geomspace(doc.get("t_start", T / 100.0), doc.get("t_stop", T),
                        doc.get("t_points", 40))
    results = []
    all_ok = True
    for lam in doc["lambdas"]:
        report = check_theorem_properties(kernel, lam, doc["lambda1"], T, grid, cfg)
        all_ok = all_ok and report.all_passed
        results.append({
            "lambda": lam,
            "complete_monotonicity_u": report.cm_u,
            "complete_monotonicity_v": report.cm_v,
            "positivity": report.positivity,
            "derivative_identity": report.derivative_identity,
            "lambda_monotonicity": report.lambda_monotonicity,
            "bounds": asdict(report.bounds),
            "failures": list(report.failures),
            "all_passed": report.all_passed,
        })
    out = _out_dir(doc) / "verify.json"
    _write_json(out, {"kernel": doc["kernel"], "results": results,
                      "all_passed": all_ok})
    print(f"wrote {out}")
    if not all_ok:
        raise AccuracyError("one or more verified properties failed")
    return 0


def _initial_field(doc, domain: Domain1D) -> SpectralField | None:
    spec = doc.get("initial")
    if spec is None:
        return None
    if "coeffs" in spec:
        coeffs = list(spec["coeffs"])[: domain.n_modes]
        coeffs += [0.0] * (domain.n_modes - len(coeffs))
        return SpectralField(domain, tuple(coeffs))
    fn = compile_expression(spec["expr"], variables=("x",))
    return project(domain, np.vectorize(fn))


def _cmd_diffuse(args) -> int:
    doc = _load_config(args.config, _DIFFUSE_SCHEMA)
    kernel = kernel_from_json(doc["kernel"])
    _admissible_or_die(kernel)
    cfg = _contour_from(doc)
    domain = Domain1D(doc["length"], doc["n_modes"])
    a = _initial_field(doc, domain)
    source = doc.get("source_expr")
    if source:
        fn = compile_expression(source, variables=("x", "t"))

        def F(t, _fn=fn):
            return project(domain, lambda x: np.vectorize(_fn)(x, t))
    else:
        F = None
    times = sorted(doc["times"])
    fields = solve_direct_many(kernel, domain, a, F, times, cfg)
    xs = np.linspace(0.0, domain.length, doc.get("x_points", 101))
    cols = [synthesize(f, xs) for f in fields]
    rows = [[x] + [col[i] for col in cols] for i, x in enumerate(xs)]
    out = _out_dir(doc) / "diffusion.csv"
    _write_csv(out, ["x"] + [f"u_t={_fmt(t)}" for t in times], rows)
    print(f"wrote {out}")
    return 0


def _cmd_invert(args) -> int:
    doc = _load_config(args.config, _INVERT_SCHEMA)
    kernel = kernel_from_json(doc["kernel"])
    _admissible_or_die(kernel)
    cfg = _contour_from(doc)
    domain = Domain1D(doc["length"], doc["n_modes"])
    q_fn = compile_expression(doc["q_expr"], variables=("t",))
    q = lambda t: float(q_fn(t))  # noqa: E731
    rng = np.random.default_rng(doc["seed"])

    obs = doc["observation"]
    truth = None
    noise_level = None
    if "coeffs" in obs:
        coeffs = list(obs["coeffs"])[: domain.n_modes]
        coeffs += [0.0] * (domain.n_modes - len(coeffs))
        h = SpectralField(domain, tuple(coeffs))
    else:
        if "truth_expr" in obs:
            fn = compile_expression(obs["truth_expr"], variables=("x",))
            truth = project(domain, np.vectorize(fn))
        elif "truth_coeffs" in obs:
            coeffs = list(obs["truth_coeffs"])[: domain.n_modes]
            coeffs += [0.0] * (domain.n_modes - len(coeffs))
            truth = SpectralField(domain, tuple(coeffs))
        else:
            raise ConfigError("synthetic observation needs truth_expr or truth_coeffs")
        h = forward_map(kernel, domain, truth, q, doc["T"], cfg)
        noise_level = obs["noise_level"]
        if noise_level > 0.0:
            noise = rng.standard_normal(domain.n_modes)
            noise *= noise_level / np.linalg.norm(noise)
            h = SpectralField(domain, tuple(np.asarray(h.coeffs) + noise))

    problem = InverseProblem(kernel, domain, q, doc["q0"], doc["T"], h)
    result = reconstruct(problem, cutoff=doc.get("cutoff"),
                         noise_level=noise_level, cfg=cfg)
    c_low, c_up = bound_constants(problem, cfg)

    out_dir = _out_dir(doc)
    payload = {
        "cutoff": result.cutoff,
        "residual": result.residual,
        "stability_bound": result.stability_bound,
        "C_lower": c_low,
        "C_upper": c_up,
        "Qn_values": list(result.Qn_values),
        "f_coeffs": list(result.f.coeffs),
        "h_coeffs": list(h.coeffs),
        "seed": doc["seed"],
    }
    _write_json(out_dir / "inverse.json", payload)
    xs = np.linspace(0.0, domain.length, doc.get("x_points", 101))
    fx = synthesize(result.f, xs)
    if truth is not None:
        tx = synthesize(truth, xs)
        _write_csv(out_dir / "source.csv", ["x", "f", "f_true"],
                   zip(xs, fx, tx))
    else:
        _write_csv(out_dir / "source.csv", ["x", "f"], zip(xs, fx))
    print(f"wrote {out_dir / 'inverse.json'} and {out_dir / 'source.csv'}")
    return 0


def _cmd_bench(args) -> int:
    import time

    cases = [
        ("1/(s+1)", lambda s: 1.0 / (s + 1.0), lambda t: math.exp(-t)),
        ("1/s^2", lambda s: 1.0 / (s * s), lambda t: t),
        ("1/(s+1)^2", lambda s: 1.0 / (s + 1.0) ** 2, lambda t: t * math.exp(-t)),
    ]
    cfg = ContourConfig(nodes=args.nodes, working_tolerance=1e-10)
    times = np.geomspace(1e-2, 10.0, 9)
    print(f"{'transform':<12} {'max rel err':<12} {'seconds':<8}")
    for name, transform, exact in cases:
        start = time.perf_counter()
        worst = 0.0
        for t in times:
            value, _ = invert(transform, float(t), cfg)
            worst = max(worst, abs(value - exact(t)) / abs(exact(t)))
        elapsed = time.perf_counter() - start
        print(f"{name:<12} {worst:<12.3e} {elapsed:<8.3f}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genfrac",
        description="relaxation and diffusion with a general convolutional "
                    "time derivative",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ml = sub.add_parser("ml", help="evaluate the Mittag-Leffler function")
    p_ml.add_argument("--alpha", type=float, required=True)
    p_ml.add_argument("--beta", type=float, required=True)
    p_ml.add_argument("--z", type=float, required=True)
    p_ml.set_defaults(fn=_cmd_ml)

    for name, fn, help_text in (
        ("relax", _cmd_relax, "sample the fundamental and impulse solutions"),
        ("verify", _cmd_verify, "machine-check the structural properties"),
        ("diffuse", _cmd_diffuse, "solve the diffusion problem on an interval"),
        ("invert", _cmd_invert, "recover a source from final-time data"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True)
        p.set_defaults(fn=fn)

    p_bench = sub.add_parser("bench", help="time the inversion corpus")
    p_bench.add_argument("--nodes", type=int, default=48)
    p_bench.set_defaults(fn=_cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except AccuracyError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except GenfracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
