"""Command-line front end.

    calderon --command forward --input eta.json --output data.json --M 64
    calderon --command reconstruct --input data.json --output eta.json --K 4 --J 12

Every command writes its main result as JSON (``--output`` or stdout) and, when
``--output`` is given, plot-ready CSV files next to it named
``<stem>.<what>.csv``. Commands that take coefficients draw a random ``W_K``
perturbation from ``--seed`` when ``--input`` is omitted.

Exit status: 0 on success, 1 on a violated precondition (one JSON line on
stderr), 2 on I/O failure.
"""

import argparse
import json
import sys
from math import pi
from pathlib import Path

import numpy as np

from calderon import conformal, forward, reconstruction, stability
from calderon.io import (
    FormatError,
    coeffs_from_json,
    coeffs_to_json,
    csv_text,
    dumps,
    matrix_from_json,
    matrix_to_json,
)
from calderon.quadrature import QuadratureGrid
from calderon.zernike import evaluate, l2_norm

COMMANDS = ("forward", "reconstruct", "stability", "oracle-check", "conformal", "witness")


class PreconditionError(ValueError):
    pass


class InputOutputError(OSError):
    pass


def build_parser():
    parser = argparse.ArgumentParser(prog="calderon", description=__doc__.split("\n")[0])
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--input", type=Path)
    parser.add_argument("--output", type=Path)
    parser.add_argument("--K", type=int, default=4)
    parser.add_argument("--J", type=int, default=12)
    parser.add_argument("--M", type=int, default=64)
    parser.add_argument("--nr", type=int, default=128)
    parser.add_argument("--ntheta", type=int, default=256)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--tol", type=float, default=1e-9)
    parser.add_argument("--map-spec", type=Path, dest="map_spec")
    return parser


def _read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputOutputError(f"cannot read {path}: {exc}") from exc


def _write(path, text):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise InputOutputError(f"cannot write {path}: {exc}") from exc


def _load_coeffs(args):
    if args.input is None:
        rng = np.random.default_rng(args.seed)
        return stability.random_W_K(rng, args.K, args.J)
    try:
        return coeffs_from_json(_read_json(args.input))
    except FormatError as exc:
        raise PreconditionError(str(exc)) from exc


def _grid(args):
    try:
        return QuadratureGrid(args.nr, args.ntheta)
    except ValueError as exc:
        raise PreconditionError(str(exc)) from exc


def _raster_rows(coeffs, n_r=33, n_theta=64):
    rows = []
    for r in np.linspace(0.0, 1.0, n_r):
        theta = 2 * pi * np.arange(n_theta) / n_theta
        values = evaluate(coeffs, r * np.exp(1j * theta))
        rows.extend((float(r), float(t), float(v.real), float(v.imag)) for t, v in zip(theta, values))
    return rows


RASTER_HEADER = ["r", "theta", "re", "im"]


def _diagonal_rows(op):
    return [(n - m, m, n, abs(v), v.real, v.imag) for (m, n), v in sorted(op.items())]


DIAGONAL_HEADER = ["j", "m", "n", "abs", "re", "im"]


def cmd_forward(args):
    if args.M < 1:
        raise PreconditionError(f"M must be >= 1, got {args.M}")
    coeffs = _load_coeffs(args)
    op = forward.assemble(coeffs, args.M)
    return matrix_to_json(op), {"diagonals": csv_text(DIAGONAL_HEADER, _diagonal_rows(op))}


def cmd_reconstruct(args):
    if args.input is None:
        raise PreconditionError("reconstruct needs --input with a matrix file")
    try:
        data = matrix_from_json(_read_json(args.input))
        req = reconstruction.ReconstructionRequest(data, args.K, args.J)
    except (FormatError, ValueError) as exc:
        raise PreconditionError(str(exc)) from exc
    coeffs = reconstruction.reconstruct(req)
    amp_rows = [
        (j, k, reconstruction.amplification_factor(j, k))
        for k in range(args.K + 1)
        for j in range(-args.J, args.J + 1)
    ]
    return coeffs_to_json(coeffs), {
        "amplification": csv_text(["j", "k", "factor"], amp_rows),
        "raster": csv_text(RASTER_HEADER, _raster_rows(coeffs)),
    }


def cmd_stability(args):
    coeffs = _load_coeffs(args)
    report = stability.verify(coeffs, args.M)
    return report.to_dict(), {"summary": stability.reports_to_csv([report])}


def cmd_oracle_check(args):
    coeffs = _load_coeffs(args)
    grid = _grid(args)
    closed = forward.assemble(coeffs, args.M)
    oracle = forward.oracle_matrix(coeffs, args.M, grid)
    rows = []
    worst = 0.0
    for (m, n), value in sorted(oracle.items()):
        diff = abs(value - closed.entry(m, n))
        worst = max(worst, diff)
        rows.append((n - m, m, n, diff))
    result = {
        "M": args.M,
        "nr": args.nr,
        "ntheta": args.ntheta,
        "cells": len(rows),
        "max_abs_discrepancy": worst,
        "tol": args.tol,
        "within_tol": worst <= args.tol,
    }
    return result, {"discrepancy": csv_text(["j", "m", "n", "abs_diff"], rows)}


def cmd_conformal(args):
    if args.map_spec is None:
        raise PreconditionError("conformal needs --map-spec")
    try:
        spec = conformal.ConformalMapSpec.from_dict(_read_json(args.map_spec))
    except (KeyError, TypeError, ValueError) as exc:
        raise PreconditionError(f"bad map spec: {exc}") from exc
    coeffs = _load_coeffs(args)
    grid = _grid(args)
    N = max(1, min(args.M, 12))
    constants = conformal.boundary_constants(spec)
    data, modes = conformal.domain_data_matrix(coeffs, spec, N, grid)
    disk_hs = forward.assemble(coeffs, N).frobenius_norm()
    eta = conformal.pull_back(coeffs, spec)
    entries = [
        {"m": m, "n": n, "re": data[i, l].real, "im": data[i, l].imag}
        for i, m in enumerate(modes)
        for l, n in enumerate(modes)
        if m * n > 0 and data[i, l] != 0
    ]
    result = {
        "map": spec.to_dict(),
        "constants": constants.to_dict(),
        "N": N,
        "disk_l2_norm": l2_norm(coeffs),
        "domain_l2_norm": conformal.domain_l2_norm(eta, spec, grid),
        "disk_hs_norm": disk_hs,
        "domain_hs_norm": conformal.domain_hs_norm(data, spec, N),
        "domain_entries": entries,
    }
    return result, {"boundary": conformal.boundary_table_csv(spec)}


def cmd_witness(args):
    coeffs = _load_coeffs(args)
    try:
        w = reconstruction.injectivity_witness(coeffs)
    except reconstruction.NoWitnessError as exc:
        raise PreconditionError(str(exc)) from exc
    rows = [
        (n0, abs(reconstruction.radial_moment(coeffs, w.j, n0)))
        for n0 in range(abs(w.j), w.n0 + 1, 2)
    ]
    result = {
        "m": w.m,
        "n": w.n,
        "re": w.value.real,
        "im": w.value.imag,
        "n0": w.n0,
        "j": w.j,
    }
    return result, {"moments": csv_text(["n0", "abs_moment"], rows)}


HANDLERS = {
    "forward": cmd_forward,
    "reconstruct": cmd_reconstruct,
    "stability": cmd_stability,
    "oracle-check": cmd_oracle_check,
    "conformal": cmd_conformal,
    "witness": cmd_witness,
}


def run(args):
    """Execute one parsed configuration; returns the exit status."""
    try:
        if args.nr < 2 or args.ntheta < 4:
            raise PreconditionError("grid sizes must satisfy nr >= 2, ntheta >= 4")
        result, extras = HANDLERS[args.command](args)
        text = dumps(result)
        if args.output is None:
            sys.stdout.write(text)
        else:
            _write(args.output, text)
            for name, body in extras.items():
                _write(args.output.with_name(f"{args.output.stem}.{name}.csv"), body)
    except (PreconditionError, ValueError) as exc:
        sys.stderr.write(json.dumps({"error": "precondition", "message": str(exc)}) + "\n")
        return 1
    except InputOutputError as exc:
        sys.stderr.write(json.dumps({"error": "io", "message": str(exc)}) + "\n")
        return 2
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
