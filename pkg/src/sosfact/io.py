"""Binary tensor files and text factor files.

Tensor file layout (all little-endian)::

    offset  size  field
    0       4     magic b"FHT1"
    4       2     format version (u16) = 1
    6       2     n_modes (u16)
    8       1     flags: bit0 one-body present, bit1 one-body complex
    9       7     reserved, zero
    16      ...   one-body, n**2 values row-major (f8, or interleaved re/im f8 pairs)
    ...     ...   two-body h[p,q,r,s], n**4 f8 row-major (s fastest)

Factor files are JSON documents whose floats carry 17 significant digits.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from sosfact.assemble import FactoredHamiltonian
from sosfact.exceptions import FormatError, SymmetryError
from sosfact.factorize import FactorizationOptions, FactorSlice, Parity
from sosfact.tensor import HamiltonianInstance, validate_symmetries
from sosfact.validation import TOL_INPUT, check_one_body, check_two_body

MAGIC = b"FHT1"
VERSION = 1
_HEADER = struct.Struct("<4sHHB7x")
FLAG_ONE_BODY = 0x01
FLAG_COMPLEX = 0x02

FACTOR_FORMAT = "FHF1"


@dataclass(frozen=True)
class TensorFile:
    """Contents of a tensor file; ``one_body`` is ``None`` when absent."""

    two_body: np.ndarray
    one_body: np.ndarray | None = None

    @property
    def n_modes(self) -> int:
        return self.two_body.shape[0]

    def instance(self, label: str = "") -> HamiltonianInstance:
        if self.one_body is None:
            return HamiltonianInstance.from_two_body(self.two_body, label)
        return HamiltonianInstance(self.one_body, self.two_body, label)


def tensor_to_bytes(h, one_body=None) -> bytes:
    h = check_two_body(h)
    n = h.shape[0]
    if n > 0xFFFF:
        raise FormatError("n_modes does not fit in 16 bits")
    flags = 0
    parts = []
    if one_body is not None:
        f = np.asarray(one_body)
        if f.shape != (n, n):
            raise FormatError(f"one-body shape {f.shape} does not match {n} modes")
        flags |= FLAG_ONE_BODY
        if np.iscomplexobj(f):
            flags |= FLAG_COMPLEX
            parts.append(np.ascontiguousarray(f, dtype="<c16").tobytes())
        else:
            parts.append(np.ascontiguousarray(f, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(h, dtype="<f8").tobytes())
    return _HEADER.pack(MAGIC, VERSION, n, flags) + b"".join(parts)


def tensor_from_bytes(
    data: bytes, *, validate: bool = True, tol: float = TOL_INPUT
) -> TensorFile:
    """Parse a tensor file.

    Raises:
        FormatError: On a bad header or a length mismatch.
        SymmetryError: If ``validate`` and the tensor fails the symmetry check.
    """
    if len(data) < _HEADER.size:
        raise FormatError("file shorter than the 16-byte header")
    magic, version, n, flags = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}")
    if data[9:16] != bytes(7):
        raise FormatError("reserved header bytes are not zero")
    if flags & ~(FLAG_ONE_BODY | FLAG_COMPLEX):
        raise FormatError(f"unknown flag bits 0x{flags:02x}")
    if n < 1:
        raise FormatError("n_modes must be at least 1")
    has_f = bool(flags & FLAG_ONE_BODY)
    f_size = n * n * (16 if flags & FLAG_COMPLEX else 8) if has_f else 0
    expected = _HEADER.size + f_size + 8 * n**4
    if len(data) != expected:
        raise FormatError(f"file has {len(data)} bytes, header implies {expected}")
    offset = _HEADER.size
    one_body = None
    if has_f:
        dtype = "<c16" if flags & FLAG_COMPLEX else "<f8"
        one_body = np.frombuffer(data, dtype, n * n, offset).reshape(n, n).astype(dtype[1:])
        offset += f_size
    h = np.frombuffer(data, "<f8", n**4, offset).reshape((n,) * 4).astype(np.float64)
    if validate:
        report = validate_symmetries(h, tol)
        if not report.ok:
            raise SymmetryError(
                f"tensor violates index symmetries (max defect {report.max_defect:.3e})"
            )
        if one_body is not None:
            check_one_body(one_body, n, tol=tol)
    return TensorFile(h, one_body)


def save_tensor(path, h, one_body=None) -> None:
    Path(path).write_bytes(tensor_to_bytes(h, one_body))


def load_tensor(path, *, validate: bool = True, tol: float = TOL_INPUT) -> TensorFile:
    return tensor_from_bytes(Path(path).read_bytes(), validate=validate, tol=tol)


def _fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise FormatError(f"cannot serialize non-finite value {x}")
    return "%.17g" % x


def _dump(obj, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [
            f'{pad}  {json.dumps(str(k))}: {_dump(v, indent + 1)}' for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(_dump(v) for v in obj) + "]"
        items = [pad + "  " + _dump(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    return _fmt_float(obj)


def _complex_flat(a: np.ndarray) -> list[float]:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).reshape(-1).tolist()


def _complex_unflat(values, n: int) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size != 2 * n * n:
        raise FormatError(f"expected {2 * n * n} floats, got {arr.size}")
    arr = arr.reshape(n, n, 2)
    # assigned part by part; arithmetic would lose signed zeros
    out = np.empty((n, n), dtype=complex)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


def factors_to_text(fh: FactoredHamiltonian) -> str:
    n = fh.n_modes
    doc = {
        "format": FACTOR_FORMAT,
        "version": VERSION,
        "n_modes": n,
        "options": {
            "degeneracy_tol": fh.options.degeneracy_tol,
            "parity_tol": fh.options.parity_tol,
            "weight_cutoff": fh.options.weight_cutoff,
        },
        "one_body": _complex_flat(fh.one_body),
        "correction": np.asarray(fh.correction, dtype=float).reshape(-1).tolist(),
        "slices": [
            {
                "weight": s.weight,
                "parity": s.parity.value,
                "lambdas": np.asarray(s.lambdas, dtype=float).tolist(),
                "rotation": _complex_flat(s.rotation),
                "slice": np.asarray(s.slice, dtype=float).reshape(-1).tolist(),
            }
            for s in fh.slices
        ],
    }
    return _dump(doc) + "\n"


def factors_from_text(text: str) -> FactoredHamiltonian:
    """Parse a factor document.

    Raises:
        FormatError: On missing fields or inconsistent sizes.
    """
    try:
        # integers parse as floats so that "-0" keeps its sign
        doc = json.loads(text, parse_int=float)
    except json.JSONDecodeError as exc:
        raise FormatError(f"factor file is not valid JSON: {exc}") from exc
    try:
        if doc["format"] != FACTOR_FORMAT or int(doc["version"]) != VERSION:
            raise FormatError("unsupported factor file format or version")
        n = int(doc["n_modes"])
        opts = FactorizationOptions(**doc["options"])
        one_body = _complex_unflat(doc["one_body"], n)
        if not np.any(one_body.imag):
            one_body = one_body.real.copy()
        correction = np.asarray(doc["correction"], dtype=np.float64).reshape(n, n)
        slices = []
        for rec in doc["slices"]:
            lambdas = np.asarray(rec["lambdas"], dtype=np.float64)
            if lambdas.shape != (n,):
                raise FormatError("slice lambdas have the wrong length")
            slices.append(
                FactorSlice(
                    weight=float(rec["weight"]),
                    parity=Parity(rec["parity"]),
                    slice=np.asarray(rec["slice"], dtype=np.float64).reshape(n, n),
                    rotation=_complex_unflat(rec["rotation"], n),
                    lambdas=lambdas,
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed factor file: {exc}") from exc
    return FactoredHamiltonian(one_body, correction, slices, opts)


def save_factors(path, fh: FactoredHamiltonian) -> None:
    Path(path).write_text(factors_to_text(fh), encoding="utf-8")


def load_factors(path) -> FactoredHamiltonian:
    return factors_from_text(Path(path).read_text(encoding="utf-8"))
