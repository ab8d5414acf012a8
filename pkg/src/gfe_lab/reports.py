"""JSON and CSV serialization of verdicts and experiment reports.

JSON output is deterministic: keys are sorted, complex numbers become
``[re, im]``, tuples become lists and non-finite floats become the strings
``"inf"``, ``"-inf"`` and ``"nan"``.  CSV writes reals with 17 significant
digits and never depends on the locale.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from typing import Any, Iterable

from .core import Verdict, Witness
from .extension import ExtensionReport
from .harness import SCHEMA_VERSION, StabilityReport, smallest_passing_eps_u


def jsonable(v: Any) -> Any:
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, complex):
        return [jsonable(v.real), jsonable(v.imag)]
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, (set, frozenset)):
        return [jsonable(x) for x in sorted(v, key=repr)]
    if isinstance(v, Verdict):
        return verdict_dict(v)
    if dataclasses.is_dataclass(v) and not isinstance(v, type):
        return jsonable(dataclasses.asdict(v))
    if hasattr(v, "item"):  # numpy scalars
        return jsonable(v.item())
    return repr(v)


def dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def witness_dict(w: Witness | None):
    if w is None:
        return None
    return {f.name: jsonable(getattr(w, f.name)) for f in dataclasses.fields(w)}


def verdict_dict(v: Verdict) -> dict:
    return {
        "passed": v.passed,
        "witness": witness_dict(v.witness),
        "checked_count": v.checked_count,
        "notes": jsonable(v.notes),
    }


def verdict_report(v: Verdict, config: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "kind": "verdict", "config": config, **verdict_dict(v)}


def stability_dict(r: StabilityReport) -> dict:
    out = {
        "schema_version": SCHEMA_VERSION,
        "kind": "stability",
        "config": r.config,
        "hypotheses": {k: verdict_dict(v) for k, v in r.hypotheses.items()},
        "hypotheses_hold": r.hypotheses_hold,
        "fitted_params": list(r.fitted_params),
        "distance": r.distance,
        "eps_v": r.eps_v,
        "passed": r.passed,
        "eps_u_scan": r.eps_u_scan,
        "smallest_passing_eps_u": smallest_passing_eps_u(r),
    }
    if r.runtimes is not None:
        out["runtimes"] = r.runtimes
    return out


def extension_dict(r: ExtensionReport, config: dict) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "extension",
        "config": config,
        "D": r.D,
        "X": r.X,
        "C": r.C,
        "closure": r.closure,
        "enumerated": r.enumerated,
        "extendable": r.extendable,
        "counterexamples": r.counterexamples,
        "certificate": r.certificate,
        "chain": r.chain,
        "convention": r.convention,
        "passed": r.passed,
    }


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, complex):
        return f"{_cell(v.real)}{'+' if v.imag >= 0 or math.isnan(v.imag) else '-'}{_cell(abs(v.imag))}j"
    if isinstance(v, tuple):
        return " ".join(_cell(x) for x in v)
    return str(v)


def residual_csv(rows: Iterable[tuple], p: int | None = None) -> str:
    """CSV of ``(label, point, residual)`` rows; point coordinates get one column each."""
    rows = list(rows)
    if p is None:
        p = max((len(x) for _, x, _ in rows), default=0)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["equation"] + [f"x{i + 1}" for i in range(p)] + ["residual"])
    for label, x, r in rows:
        coords = [_cell(c) for c in x] + [""] * (p - len(x))
        w.writerow([label] + coords + [_cell(r)])
    return buf.getvalue()
