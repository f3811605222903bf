"""Matrix Market exchange for dense complex matrices.

Reading accepts the ``array`` and ``coordinate`` formats with field ``real``
or ``complex`` and symmetry ``general``.  Parsing of the body is delegated to
``scipy.io.mmread`` once the header has been checked.
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
import scipy.io

from .errors import ParseError, ShapeMismatch

_FORMATS = {"array", "coordinate"}
_FIELDS = {"real", "complex"}


def _check_header(line: str) -> tuple[str, str]:
    parts = line.strip().split()
    if len(parts) != 5 or parts[0].lower() != "%%matrixmarket" or parts[1].lower() != "matrix":
        raise ParseError(f"not a Matrix Market matrix header: {line.strip()!r}")
    fmt, fld, sym = (p.lower() for p in parts[2:])
    if fmt not in _FORMATS:
        raise ParseError(f"unsupported format {fmt!r}")
    if fld not in _FIELDS:
        raise ParseError(f"unsupported field {fld!r} (only real and complex are accepted)")
    if sym != "general":
        raise ParseError(f"unsupported symmetry {sym!r} (only general is accepted)")
    return fmt, fld


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a Matrix Market file into a complex128 array.

    ``OSError`` propagates for unreadable paths; malformed content raises
    ``ParseError``.
    """
    text = Path(path).read_text()
    return parse_matrix(text)


def parse_matrix(text: str) -> np.ndarray:
    first = text.split("\n", 1)[0]
    _check_header(first)
    try:
        data = scipy.io.mmread(io.BytesIO(text.encode()))
    except (ValueError, IndexError, TypeError) as exc:
        raise ParseError(f"malformed Matrix Market body: {exc}") from exc
    if hasattr(data, "toarray"):
        data = data.toarray()
    arr = np.asarray(data, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ParseError("matrix contains non-finite entries")
    return arr


def format_matrix(A, comment: str = "") -> str:
    """Dense ``array complex general`` text with shortest round-trip floats."""
    arr = np.asarray(A, dtype=np.complex128)
    if arr.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got shape {arr.shape}")
    rows, cols = arr.shape
    lines = ["%%MatrixMarket matrix array complex general"]
    for c in comment.splitlines():
        lines.append(f"% {c}")
    lines.append(f"{rows} {cols}")
    # array format is column-major
    for z in arr.T.ravel():
        lines.append(f"{_fmt(z.real)} {_fmt(z.imag)}")
    return "\n".join(lines) + "\n"


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        return "0"
    return repr(x)


def write_matrix(path: str | Path, A, comment: str = "") -> None:
    Path(path).write_text(format_matrix(A, comment))
