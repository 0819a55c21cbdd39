"""Command-line interface.

Every command writes JSON records, one per line, to standard output.

Exit codes: 0 ok, 2 usage or parameters, 3 I/O or file format,
4 symmetry validation, 5 decomposition, 6 verification.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import os
import sys

import numpy as np

from sosfact import fock, generators, io
from sosfact.assemble import (
    factorize_hamiltonian,
    reconstruct_tensor,
    relative_error,
    truncation_scan,
)
from sosfact.exceptions import (
    DecompositionError,
    FormatError,
    SizeGuardError,
    SymmetryError,
)
from sosfact.factorize import FactorizationOptions
from sosfact.tensor import validate_symmetries
from sosfact.validation import TOL_INPUT

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_SYMMETRY = 4
EXIT_DECOMPOSITION = 5
EXIT_VERIFICATION = 6

DEFAULT_DTS = (0.2, 0.1, 0.05, 0.025)


class VerificationFailed(Exception):
    pass


def _emit(record: dict) -> None:
    print(json.dumps(record, allow_nan=False), flush=True)


def _load(path: str, no_validate: bool = False) -> io.TensorFile:
    return io.load_tensor(path, validate=not no_validate, tol=TOL_INPUT)


def cmd_generate(args) -> int:
    if args.model == "random":
        h, f = generators.random_valid(args.modes, args.seed), None
    elif args.model == "real-basis":
        h, f = generators.real_basis_instance(args.modes, args.rank, args.seed), None
    else:
        params = generators.RingModelParams(args.modes, args.length, args.v0, args.sigma)
        inst = generators.ring_planewave(params)
        h, f = inst.two_body, inst.one_body
    data = io.tensor_to_bytes(h, f)
    with open(args.out, "wb") as fh:
        fh.write(data)
    _emit({
        "command": "generate",
        "model": args.model,
        "out": args.out,
        "n_modes": int(h.shape[0]),
        "bytes": len(data),
        "symmetry": validate_symmetries(h).as_dict(),
    })
    return EXIT_OK


def _weight_summary(weights: np.ndarray) -> dict | None:
    if weights.size == 0:
        return None
    q1, q2, q3 = np.quantile(np.abs(weights), [0.25, 0.5, 0.75])
    return {"min": float(weights.min()), "max": float(weights.max()),
            "abs_quartiles": [float(q1), float(q2), float(q3)]}


def cmd_factorize(args) -> int:
    tf = _load(args.input, args.no_validate)
    opts = FactorizationOptions(args.degeneracy_tol, args.parity_tol, args.cutoff)
    inst = tf.instance()
    fh = factorize_hamiltonian(inst, opts, tol=TOL_INPUT, validate=not args.no_validate)
    io.save_factors(args.out, fh)
    _emit({
        "command": "factorize",
        "out": args.out,
        "n_modes": inst.n_modes,
        "n_slices": len(fh.slices),
        "n_symmetric": fh.n_symmetric,
        "n_antisymmetric": fh.n_antisymmetric,
        "weights": _weight_summary(fh.weights),
        "recon_error": relative_error(reconstruct_tensor(fh), inst.two_body),
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    tf = _load(args.tensor)
    fh = io.load_factors(args.factors)
    if fh.n_modes != tf.n_modes:
        raise ValueError(
            f"tensor has {tf.n_modes} modes but factors have {fh.n_modes}"
        )
    inst = tf.instance()
    record = {
        "command": "verify",
        "n_modes": inst.n_modes,
        "recon_error": relative_error(reconstruct_tensor(fh), inst.two_body),
    }
    failed = []
    if record["recon_error"] > args.tol:
        failed.append("reconstruction")
    if inst.n_modes <= args.max_modes_fock:
        exact = fock.build_from_tensor(inst)
        factored = fock.build_from_factored(fh)
        scale = max(1.0, float(np.max(np.abs(exact))))
        record["fock_max_discrepancy"] = float(np.max(np.abs(exact - factored))) / scale
        record["spectrum_error"] = fock.compare_spectra(exact, factored, args.k)
        if record["fock_max_discrepancy"] > args.tol:
            failed.append("fock")
        if record["spectrum_error"] > args.tol:
            failed.append("spectrum")
    else:
        record["fock_skipped"] = True
    record["failed"] = failed
    record["ok"] = not failed
    _emit(record)
    if failed:
        raise VerificationFailed(", ".join(failed))
    return EXIT_OK


def cmd_truncation_scan(args) -> int:
    tf = _load(args.tensor)
    if args.spectrum and tf.n_modes > fock.MAX_MODES_TROTTER:
        raise SizeGuardError(
            f"--spectrum supports at most {fock.MAX_MODES_TROTTER} modes"
        )
    report = truncation_scan(
        tf.instance(), args.thresholds, spectrum=args.spectrum, k=args.k, tol=TOL_INPUT
    )
    for row in report.rows():
        _emit({"command": "truncation-scan", **row})
    return EXIT_OK


def cmd_trotter_scan(args) -> int:
    tf = _load(args.tensor)
    if not args.dts:
        raise ValueError("at least one time step is required")
    if tf.n_modes > fock.MAX_MODES_TROTTER:
        raise SizeGuardError(
            f"trotter-scan supports at most {fock.MAX_MODES_TROTTER} modes"
        )
    inst = tf.instance()
    fh = factorize_hamiltonian(inst, tol=TOL_INPUT)
    result = fock.trotter_scan(fh, args.dts, reference=fock.build_from_tensor(inst))
    _emit({"command": "trotter-scan", **result.as_dict()})
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sosfact",
        description="Pairwise factorization of fermionic two-body interactions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a generated tensor file")
    gen.add_argument("model", choices=["random", "real-basis", "ring"])
    gen.add_argument("--modes", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--rank", type=int, default=2, help="real-basis rank")
    gen.add_argument("--length", type=float, default=10.0, help="ring circumference")
    gen.add_argument("--v0", type=float, default=1.0, help="ring potential strength")
    gen.add_argument("--sigma", type=float, default=1.0, help="ring potential width")
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    fac = sub.add_parser("factorize", help="factor a tensor file")
    fac.add_argument("input")
    fac.add_argument("--out", required=True)
    fac.add_argument("--cutoff", type=float, default=0.0)
    fac.add_argument("--degeneracy-tol", type=float, default=1e-9)
    fac.add_argument("--parity-tol", type=float, default=1e-9)
    fac.add_argument("--no-validate", action="store_true")
    fac.set_defaults(func=cmd_factorize)

    ver = sub.add_parser("verify", help="check factors against the tensor")
    ver.add_argument("tensor")
    ver.add_argument("factors")
    ver.add_argument("--max-modes-fock", type=int, default=10)
    ver.add_argument("--k", type=int, default=4)
    ver.add_argument("--tol", type=float, default=1e-9)
    ver.set_defaults(func=cmd_verify)

    trunc = sub.add_parser("truncation-scan", help="error versus weight threshold")
    trunc.add_argument("tensor")
    trunc.add_argument("--thresholds", type=_float_list, required=True,
                       help="comma-separated, ascending")
    trunc.add_argument("--spectrum", action="store_true")
    trunc.add_argument("--k", type=int, default=4)
    trunc.set_defaults(func=cmd_truncation_scan)

    trot = sub.add_parser("trotter-scan", help="first-order Trotter step error")
    trot.add_argument("tensor")
    trot.add_argument("--dts", type=_float_list, default=list(DEFAULT_DTS),
                      help="comma-separated time steps")
    trot.set_defaults(func=cmd_trotter_scan)
    return parser


def _thread_limit():
    value = os.environ.get("FHT_THREADS")
    if not value:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=max(1, int(value)))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except SymmetryError as exc:
        print(f"symmetry error: {exc}", file=sys.stderr)
        return EXIT_SYMMETRY
    except DecompositionError as exc:
        print(f"decomposition error: {exc}", file=sys.stderr)
        return EXIT_DECOMPOSITION
    except (FormatError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SizeGuardError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
