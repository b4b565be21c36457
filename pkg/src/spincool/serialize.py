"""Byte-exact CSV and JSON serialization of traces and tables.

Floats are written with ``repr`` (shortest round-trip decimal), lines end in LF
and every document ends with a newline, so parsing an emitted document gives
back bit-identical values.
"""
from __future__ import annotations

import csv
import io
import json
import math

from .cascade import CoolingTrace, TraceRecord
from .errors import InvalidParameterError

TRACE_TAIL = ("occupancy_abs", "occupancy_rel", "step_success", "cum_success", "stage_index")
FORMATS = ("csv", "json")


def _m_label(m: float) -> str:
    return f"P_{m:g}"


def trace_columns(n_spins: int) -> list:
    ms = [(2 * k - n_spins) / 2 for k in range(n_spins + 1)]
    return ["M"] + [_m_label(m) for m in ms] + list(TRACE_TAIL)


def _num(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _json_num(value):
    # JSON has no non-finite literals; they travel as strings
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


NONFINITE = ("nan", "inf", "-inf")


def _from_json(value):
    return float(value) if isinstance(value, str) and value in NONFINITE else value


def _check_format(fmt):
    if fmt not in FORMATS:
        raise InvalidParameterError(f"format must be one of {FORMATS}, got {fmt!r}")


def _trace_rows(trace):
    for r in trace.records:
        yield [r.M, *r.probs, r.occupancy_abs, r.occupancy_rel, r.step_success, r.cum_success, r.stage_index]


def emit_trace(trace: CoolingTrace, fmt: str = "csv") -> bytes:
    """Serialize a cooling trace. Columns: ``M``, ``P_m`` for ``m = -N/2 .. N/2``,
    then occupancy, success and stage columns."""
    _check_format(fmt)
    cols = trace_columns(trace.n_spins)
    if fmt == "csv":
        lines = [",".join(cols)]
        lines += [",".join(_num(v) for v in row) for row in _trace_rows(trace)]
        return ("\n".join(lines) + "\n").encode("utf-8")
    doc = {
        "n_spins": trace.n_spins,
        "columns": cols,
        "records": [dict(zip(cols, map(_json_num, row))) for row in _trace_rows(trace)],
        "stage_boundaries": list(trace.stage_boundaries),
        "warnings": list(trace.warnings),
    }
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def _record_from(values, n_spins):
    probs = tuple(float(v) for v in values[1:n_spins + 2])
    tail = values[n_spins + 2:]
    return TraceRecord(int(values[0]), probs, float(tail[0]), float(tail[1]), float(tail[2]),
                       float(tail[3]), int(tail[4]))


def parse_trace(data: bytes, fmt: str = "csv") -> CoolingTrace:
    """Inverse of ``emit_trace`` (stage boundaries are rebuilt from the stage column for CSV)."""
    _check_format(fmt)
    text = data.decode("utf-8")
    if fmt == "csv":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], rows[1:]
        n_spins = len(header) - 1 - len(TRACE_TAIL) - 1
        if header != trace_columns(n_spins):
            raise InvalidParameterError("unexpected trace header")
        trace = CoolingTrace(n_spins=n_spins, records=[_record_from(r, n_spins) for r in body])
        last = None
        for rec in trace.records[1:]:
            if rec.stage_index != last:
                trace.stage_boundaries.append(rec.M - 1)
                last = rec.stage_index
        return trace
    doc = json.loads(text)
    n_spins = doc["n_spins"]
    cols = doc["columns"]
    records = [_record_from([_from_json(rec[c]) for c in cols], n_spins) for rec in doc["records"]]
    return CoolingTrace(n_spins=n_spins, records=records, stage_boundaries=list(doc["stage_boundaries"]),
                        warnings=list(doc["warnings"]))


def emit_table(columns, rows, fmt: str = "csv") -> bytes:
    """Serialize a generic table of numbers and strings."""
    _check_format(fmt)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([v if isinstance(v, str) else _num(v) for v in row])
        return buf.getvalue().encode("utf-8")
    doc = {"columns": list(columns), "rows": [dict(zip(columns, map(_json_num, row))) for row in rows]}
    return (json.dumps(doc, indent=1) + "\n").encode("utf-8")


def parse_table(data: bytes, fmt: str = "csv"):
    """Return ``(columns, rows)``; numeric cells come back as ``float`` (CSV) or native JSON values."""
    _check_format(fmt)
    text = data.decode("utf-8")
    if fmt == "json":
        doc = json.loads(text)
        return doc["columns"], [[_from_json(r[c]) for c in doc["columns"]] for r in doc["rows"]]
    rows = list(csv.reader(io.StringIO(text)))

    def cell(v):
        try:
            return float(v)
        except ValueError:
            return v

    return rows[0], [[cell(v) for v in r] for r in rows[1:]]
