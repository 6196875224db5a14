"""JSON and CSV emitters with fixed columns and 17-digit floats."""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .estimates import BootstrapResult, EstimateReport
from .phase import FixedPointInfo, PhaseTrajectory
from .radial import RadialSolution

PROFILE_COLUMNS = ("r", "u", "v", "du", "dv")
TRAJECTORY_COLUMNS = ("t", "X", "Y", "Z", "W")
REPORT_COLUMNS = ("scale", "lhs", "rhs", "constant")
FIXED_POINT_COLUMNS = ("label", "X", "Y", "Z", "W", "l1", "l2", "l3", "l4", "unstable_dim")


def fmt(x) -> str:
    """17 significant digits; -0 printed as 0; complex as re+imj."""
    if isinstance(x, (complex, np.complexfloating)):
        if x.imag == 0:
            return fmt(x.real)
        return f"{fmt(x.real)}{'+' if x.imag >= 0 else '-'}{fmt(abs(x.imag))}j"
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return _jsonable(c.real) if c.imag == 0 else {"re": _jsonable(c.real), "im": _jsonable(c.imag)}
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return fmt(x)  # JSON has no inf/nan literals
        return 0.0 if x == 0.0 else x
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if hasattr(obj, "value"):
        return obj.value
    return obj


def dumps_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n"


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")
    return buf.getvalue()


def table(obj):
    """(header, rows) for anything the CLI emits as CSV."""
    if isinstance(obj, RadialSolution):
        v = obj.v if obj.v.size else np.full_like(obj.u, np.nan)
        dv = obj.dv if obj.dv.size else np.full_like(obj.u, np.nan)
        if not (np.any(obj.u) or np.any(obj.du) or np.any(v) or np.any(dv)):
            # identically zero profile: one row at the outer radius says it all
            return PROFILE_COLUMNS, [(obj.r[-1], 0.0, v[-1], 0.0, dv[-1])]
        return PROFILE_COLUMNS, zip(obj.r, obj.u, v, obj.du, dv)
    if isinstance(obj, PhaseTrajectory):
        return TRAJECTORY_COLUMNS, ((t, *s) for t, s in zip(obj.t, obj.states))
    if isinstance(obj, EstimateReport):
        return REPORT_COLUMNS, ((r.scale, r.lhs, r.rhs, r.constant) for r in obj.records)
    if isinstance(obj, list) and obj and isinstance(obj[0], FixedPointInfo):
        return FIXED_POINT_COLUMNS, ((fp.label, *fp.coords.as_array(), *fp.eigenvalues, fp.unstable_dim)
                                     for fp in obj)
    raise TypeError(f"no CSV layout for {type(obj).__name__}")


def to_csv(obj) -> str:
    header, rows = table(obj)
    return _rows_csv(header, rows)


def report_dict(rep: EstimateReport) -> dict:
    notes = {k: v for k, v in rep.notes.items() if k != "values"}
    return {
        "label": rep.label,
        "verdict": rep.verdict,
        "ratio_bound": rep.ratio_bound,
        "constant_ratio": rep.constant_ratio,
        "records": [asdict(r) for r in rep.records],
        "secondary_records": [asdict(r) for r in rep.secondary_records],
        "notes": notes,
    }


def solution_dict(sol: RadialSolution) -> dict:
    return {
        "status": asdict(sol.status),
        "u0": sol.u0,
        "v0": sol.v0,
        "profile": {c: getattr(sol, c) for c in PROFILE_COLUMNS if getattr(sol, c).size},
    }


def trajectory_dict(traj: PhaseTrajectory) -> dict:
    return {"escape_time": traj.escape_time, "meta": traj.meta,
            "t": traj.t, "states": traj.states}


def fixed_points_dict(fps) -> list:
    return [{"label": fp.label, "coords": fp.coords.as_array()[:4], "eigenvalues": list(fp.eigenvalues),
             "unstable_dim": fp.unstable_dim, "admissible": fp.admissible} for fp in fps]


def bootstrap_dict(res: BootstrapResult) -> dict:
    return asdict(res)


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
