"""Command-line interface: ``hardyrank {certify,witness,frames,selftest}``.

Exit codes: 0 verdict pass, 1 input error, 2 inconclusive, 3 selftest failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import bidisc
from .bidisc import TiltedCoefficients
from .blaschke import BlaschkeProduct, parse_complex, parse_zero_list
from .errors import HardyRankError, InvalidZeroError, ZeroInputError
from .rank_engine import certify_rank, dumps, max_pairing_shift, pairing_check, tilde_vector, witness_coefficients

EXIT_OK, EXIT_INPUT, EXIT_INCONCLUSIVE, EXIT_SELFTEST = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    phi: BlaschkeProduct
    psi: BlaschkeProduct
    n: int
    buffer: int
    tol: float
    trials: int
    seed: int
    out: str | None


def _inner(zeros_text, const_text, name):
    try:
        zeros = parse_zero_list(zeros_text)
    except ValueError as exc:
        raise InputError(f"malformed --{name}-zeros: {exc}") from None
    try:
        const = parse_complex(const_text)
    except ValueError as exc:
        raise InputError(f"malformed --{name}-const: {exc}") from None
    try:
        return BlaschkeProduct(tuple(zeros), const)
    except InvalidZeroError as exc:
        raise InputError(f"--{name}-zeros/--{name}-const rejected: {exc}") from None


def make_config(args) -> RunConfig:
    phi = _inner(args.phi_zeros, args.phi_const, "phi")
    psi = _inner(args.psi_zeros, args.psi_const, "psi")
    if args.tol <= 0:
        raise InputError("--tol must be positive")
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    if args.buffer < 0:
        raise InputError("--buffer must be nonnegative")
    need = phi.degree + psi.degree + args.buffer
    if args.n < need:
        raise InputError(f"--n {args.n} is too small: need n >= degree(phi) + degree(psi) + buffer = {need}")
    return RunConfig(args.command, phi, psi, args.n, args.buffer, args.tol, args.trials, args.seed, args.out)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def cmd_certify(config: RunConfig) -> int:
    cert = certify_rank(config.phi, config.psi, config.n, config.buffer, config.tol, config.trials, config.seed)
    _emit(cert.to_json(), config.out)
    return EXIT_OK if cert.verdict in ("rank_eq_2", "rank_eq_1") else EXIT_INCONCLUSIVE


def _pairs_to_matrix(rows, name):
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"xi field {name!r} must be a 2-D array of [re, im] pairs") from None
    if arr.ndim != 3 or arr.shape[-1] != 2:
        raise InputError(f"xi field {name!r} must be a 2-D array of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _matrix_to_pairs(mat):
    return [[[float(c.real), float(c.imag)] for c in row] for row in mat]


def load_xi(path) -> TiltedCoefficients:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read xi file: {exc}") from None
    if not isinstance(data, dict) or "A" not in data or "B" not in data:
        raise InputError("xi file must be a JSON object with 'A' and 'B'")
    a = _pairs_to_matrix(data["A"], "A")
    b = _pairs_to_matrix(data["B"], "B")
    if a.shape != b.shape:
        raise InputError(f"xi 'A' has shape {a.shape} but 'B' has shape {b.shape}")
    return TiltedCoefficients(a, b)


def cmd_witness(config: RunConfig, xi_path) -> int:
    phi, psi, N = config.phi, config.psi, config.n
    if phi.degree == 0 or psi.degree == 0:
        raise InputError("witness needs two nonconstant inner functions")
    xi = load_xi(xi_path)
    expected = (phi.degree, psi.degree)
    if xi.shape != expected:
        raise InputError(f"xi has shape {xi.shape}, expected (d1, d2) = {expected}")
    try:
        eta = witness_coefficients(phi, psi, xi, N)
    except ZeroInputError:
        raise InputError("zero-input: xi must be nonzero") from None
    P, Q = max_pairing_shift(phi, psi, N, config.buffer)
    pairing = pairing_check(phi, psi, tilde_vector(phi, psi, xi, N), tilde_vector(phi, psi, eta, N), P, Q, config.buffer)
    doc = {
        "eta": {"A": _matrix_to_pairs(eta.A), "B": _matrix_to_pairs(eta.B)},
        "xi_norm": xi.norm(),
        "eta_norm": eta.norm(),
        "pairing_max": pairing,
        "window": [P, Q],
    }
    _emit(dumps(doc) + "\n", config.out)
    return EXIT_OK


def cmd_frames(config: RunConfig) -> int:
    phi, psi, N = config.phi, config.psi, config.n
    outdir = config.out or "."
    try:
        os.makedirs(outdir, exist_ok=True)
        frames = [bidisc.submodule_frame(phi, psi, N)]
        if phi.degree and psi.degree:
            frames.extend(bidisc.e_frames(phi, psi, N))
        written = []
        for frame in frames:
            path = os.path.join(outdir, f"{frame.label}.frame")
            bidisc.write_frame(frame, path)
            written.append(f"{path} {frame.dim}")
    except OSError as exc:
        raise InputError(f"unwritable path: {exc}") from None
    print("\n".join(written))
    return EXIT_OK


def cmd_selftest(config: RunConfig, roster_name: str, flip_sign: bool) -> int:
    from .selftest import default_roster, run_checks

    roster = default_roster() if roster_name == "default" else []
    count, first_fail = 0, None
    for result in run_checks(
        roster, config.n, config.buffer, config.tol, config.trials, config.seed, s_sign=1 if flip_sign else -1
    ):
        count += 1
        print(result.line(), flush=True)
        if not result.passed and first_fail is None:
            first_fail = result
    print(f"{count} checks run")
    if first_fail is not None:
        print(f"selftest failed: first failing check {first_fail.name} ({first_fail.pair})")
        return EXIT_SELFTEST
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardyrank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--phi-zeros", default="0", help="semicolon-separated zeros of phi ('' for a constant)")
    common.add_argument("--psi-zeros", default="0", help="semicolon-separated zeros of psi ('' for a constant)")
    common.add_argument("--phi-const", default="1")
    common.add_argument("--psi-const", default="1")
    common.add_argument("--n", type=int, default=32, help="truncation degree")
    common.add_argument("--buffer", type=int, default=8)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None)
    sub.add_parser("certify", parents=[common], help="emit a rank certificate as JSON")
    w = sub.add_parser("witness", parents=[common], help="compute eta for a given xi")
    w.add_argument("--xi", required=True, help="JSON file with 'A' and 'B' arrays of [re, im] pairs")
    sub.add_parser("frames", parents=[common], help="export S, E and E-tilde frames to --out directory")
    s = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    s.add_argument("--roster", choices=("default", "empty"), default="default")
    s.add_argument("--debug-flip-sign", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = make_config(args)
        if args.command == "certify":
            return cmd_certify(config)
        if args.command == "witness":
            return cmd_witness(config, args.xi)
        if args.command == "frames":
            return cmd_frames(config)
        return cmd_selftest(config, args.roster, args.debug_flip_sign)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (HardyRankError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
