"""JSON/CSV interchange formats used by the command-line front end."""

import csv
import io
import json

from calderon.forward import BandedBoundaryOperator
from calderon.zernike import ZernikeCoeffs

__all__ = [
    "FormatError",
    "coeffs_to_json",
    "coeffs_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "dumps",
    "csv_text",
]

BASIS_TAG = "zernike-disk"


class FormatError(ValueError):
    """Input parsed as JSON but does not match the expected schema."""


def dumps(obj):
    """Deterministic JSON text: fixed key order, shortest round-trip floats."""
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def coeffs_to_json(coeffs):
    return {
        "basis": BASIS_TAG,
        "K": coeffs.K,
        "J": coeffs.J,
        "entries": [
            {"j": j, "k": k, "re": c.real, "im": c.imag}
            for (j, k), c in coeffs.items()
            if c != 0
        ],
    }


def coeffs_from_json(data):
    try:
        if data.get("basis") != BASIS_TAG:
            raise FormatError(f"expected basis {BASIS_TAG!r}, got {data.get('basis')!r}")
        entries = {}
        for item in data["entries"]:
            key = (int(item["j"]), int(item["k"]))
            if key in entries:
                raise FormatError(f"duplicate coefficient entry {key}")
            entries[key] = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        return ZernikeCoeffs(entries, K=int(data["K"]), J=int(data["J"]))
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed coefficient file: {exc!r}") from exc
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def matrix_to_json(op):
    cells = sorted(op.items())
    return {
        "M": op.M,
        "entries": [
            {"m": m, "n": n, "re": v.real, "im": v.imag} for (m, n), v in cells if v != 0
        ],
    }


def matrix_from_json(data):
    try:
        M = int(data["M"])
        entries = {}
        for item in data["entries"]:
            key = (int(item["m"]), int(item["n"]))
            if key in entries:
                raise FormatError(f"duplicate matrix entry {key}")
            entries[key] = complex(float(item.get("re", 0.0)), float(item.get("im", 0.0)))
        return BandedBoundaryOperator.from_entries(M, entries)
    except (KeyError, TypeError, AttributeError) as exc:
        raise FormatError(f"malformed matrix file: {exc!r}") from exc
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(str(exc)) from exc


def _cell(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return value


def csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()
