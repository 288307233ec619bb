"""File formats: matrix files, report files and the ensemble CSV.

Floats are always written with 17 significant digits so that reading a file
back gives bit-identical doubles.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .bounds import BoundReport, ChannelSpectrum
from .errors import ParseError
from .linalg import DEFAULT_TOL
from .smatrices import channels
from .states import NORM_TOL, DensityMatrix

REPORT_SCHEMA = "eofb.report/1"
CSV_SCHEMA_VERSION = 1


def fmt_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    text = "%.17g" % x
    # keep integral values typed as floats when read back (and keep -0.0)
    return text if any(ch in text for ch in ".en") else text + ".0"


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written as %.17g."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in seq) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in seq]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


@dataclass(frozen=True)
class MatrixFile:
    d: int
    matrix: np.ndarray
    label: str | None = None

    def to_json(self) -> str:
        rows = [[[float(z.real), float(z.imag)] for z in row] for row in self.matrix]
        body: dict[str, Any] = {"d": self.d, "matrix": rows}
        if self.label is not None:
            body["label"] = self.label
        return dumps(body) + "\n"

    def density(self, tol: float = DEFAULT_TOL) -> DensityMatrix:
        return DensityMatrix(self.d, self.matrix, tol)


def parse_matrix_file(text: str) -> MatrixFile:
    try:
        body = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from None
    if not isinstance(body, dict):
        raise ParseError("top level must be a JSON object")
    if "d" not in body or "matrix" not in body:
        raise ParseError("matrix file needs keys 'd' and 'matrix'")
    d = body["d"]
    if isinstance(d, bool) or not isinstance(d, int) or d < 2:
        raise ParseError(f"'d' must be an integer >= 2, got {d!r}")
    n = 2 * d
    rows = body["matrix"]
    if not isinstance(rows, list) or len(rows) != n:
        raise ParseError(f"'matrix' must have {n} rows for d={d}")
    out = np.empty((n, n), dtype=complex)
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise ParseError(f"row {r} must have {n} entries")
        for c, pair in enumerate(row):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
            ):
                raise ParseError(f"entry ({r}, {c}) must be a [re, im] pair of numbers")
            out[r, c] = complex(pair[0], pair[1])
    if not np.all(np.isfinite(out)):
        raise ParseError("matrix has non-finite entries")
    label = body.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("'label' must be a string")
    return MatrixFile(d, out, label)


def read_matrix_file(path: str | Path) -> tuple[MatrixFile, str]:
    """The parsed file and the sha256 of its bytes."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ParseError("matrix file is not UTF-8") from None
    return parse_matrix_file(text), hashlib.sha256(raw).hexdigest()


def report_document(report: BoundReport, version: str, input_sha256: str, tol: float, label: str | None = None) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "tool_version": version,
        "input_sha256": input_sha256,
        "label": label,
        "tolerances": {"tol": tol, "trace": NORM_TOL},
        "report": report.as_dict(),
    }


def report_from_dict(body: dict) -> BoundReport:
    """Inverse of ``BoundReport.as_dict``."""
    spectra = []
    c_ij = []
    for entry in body["channels"]:
        lam = np.array(entry["lambdas"], dtype=float)
        lam.setflags(write=False)
        spectra.append(ChannelSpectrum(tuple(entry["channel"]), lam))
        c_ij.append(float(entry["c_ij"]))
    return BoundReport(
        d=body["d"],
        channels=tuple(sp.channel for sp in spectra),
        spectra=tuple(spectra),
        c_ij=tuple(c_ij),
        c_db=float(body["c_db"]),
        eof_lower=float(body["eof_lower"]),
        mode=body["mode"],
        wootters_c=body["wootters_c"],
        wootters_eof=body["wootters_eof"],
        rank=body["rank"],
    )


def _opt(x: float | None) -> str:
    return "" if x is None else fmt_float(x)


def channel_labels(d: int) -> list[str]:
    sep = "" if d < 10 else "_"
    return [f"c_{i}{sep}{j}" for i, j in channels(d)]


def report_csv(report: BoundReport) -> str:
    header = ["d", "rank", "mode", *channel_labels(report.d), "c_db", "eof_lower", "wootters_c", "wootters_eof"]
    row = [
        str(report.d),
        str(report.rank),
        report.mode,
        *(fmt_float(c) for c in report.c_ij),
        fmt_float(report.c_db),
        fmt_float(report.eof_lower),
        _opt(report.wootters_c),
        _opt(report.wootters_eof),
    ]
    return ",".join(header) + "\n" + ",".join(row) + "\n"


def ensemble_header(d: int) -> list[str]:
    """Version-1 ensemble columns; empirical_c and gap stay empty without --verify."""
    return ["index", "rank", *channel_labels(d), "c_db", "eof_lower", "empirical_c", "gap"]


@dataclass(frozen=True)
class EnsembleRow:
    index: int
    rank: int
    c_ij: tuple[float, ...]
    c_db: float
    eof_lower: float
    empirical_c: float | None = None
    gap: float | None = None

    def cells(self) -> list[str]:
            return [
            str(self.index),
            str(self.rank),
            *(fmt_float(c) for c in self.c_ij),
            fmt_float(self.c_db),
            fmt_float(self.eof_lower),
            _opt(self.empirical_c),
            _opt(self.gap),
        ]


def ensemble_csv(d: int, rows: list[EnsembleRow]) -> str:
    lines = [",".join(ensemble_header(d))]
    lines += [",".join(r.cells()) for r in sorted(rows, key=lambda r: r.index)]
    return "\n".join(lines) + "\n"
