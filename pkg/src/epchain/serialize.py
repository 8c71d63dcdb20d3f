"""CSV / JSON serialization of traces, grids and boundary curves.

CSV output is deterministic: header row always present, floats printed with
17 significant digits, row order fixed by construction.  JSON payloads round
trip back into equal library objects.
"""

from __future__ import annotations

import io
import json
import os
import tempfile

import numpy as np

from .analysis import AxisSpec, BoundaryCurve, PhaseGrid
from .dynamics import EvolutionTrace
from .models import IsingBoundary, ModelKind, ModelSpec


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write(path: str, text: str) -> None:
    """Write-then-rename so readers never observe a partial file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".epchain-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def spec_to_dict(spec: ModelSpec) -> dict:
    return {
        "kind": spec.kind.value,
        "N": spec.N,
        "V": spec.V,
        "gamma": spec.gamma,
        "J": spec.J,
        "Delta": spec.Delta,
        "ising_boundary": spec.ising_boundary.value,
    }


def spec_from_dict(d: dict) -> ModelSpec:
    return ModelSpec(
        kind=ModelKind(d["kind"]),
        N=int(d["N"]),
        V=float(d["V"]),
        gamma=float(d["gamma"]),
        J=float(d["J"]),
        Delta=float(d["Delta"]),
        ising_boundary=IsingBoundary(d["ising_boundary"]),
    )


# ---------------------------------------------------------------------------
# evolution traces

def trace_to_csv(trace: EvolutionTrace) -> str:
    out = io.StringIO()
    out.write("t,fidelity,log_norm\n")
    for t, f, n in zip(trace.times, trace.fidelities, trace.log_norms):
        out.write(f"{fmt(t)},{fmt(f)},{fmt(n)}\n")
    return out.getvalue()


def trace_to_json(trace: EvolutionTrace) -> str:
    return json.dumps(
        {
            "type": "evolution_trace",
            "spec": spec_to_dict(trace.spec),
            "target_name": trace.target_name,
            "gamma_used": trace.gamma_used,
            "times": [float(x) for x in trace.times],
            "fidelities": [float(x) for x in trace.fidelities],
            "log_norms": [float(x) for x in trace.log_norms],
        },
        indent=2,
    )


def trace_from_json(text: str) -> EvolutionTrace:
    d = json.loads(text)
    if d.get("type") != "evolution_trace":
        raise ValueError("not an evolution_trace payload")
    return EvolutionTrace(
        times=np.array(d["times"]),
        fidelities=np.array(d["fidelities"]),
        log_norms=np.array(d["log_norms"]),
        target_name=d["target_name"],
        spec=spec_from_dict(d["spec"]),
        gamma_used=float(d["gamma_used"]),
    )


# ---------------------------------------------------------------------------
# phase grids

def grid_to_csv(grid: PhaseGrid) -> str:
    out = io.StringIO()
    out.write(f"{grid.x_axis.name.lower()},gamma,max_im_eps,broken\n")
    mask = grid.broken_mask
    for i, x in enumerate(grid.x_axis.values):
        for j, g in enumerate(grid.y_axis.values):
            out.write(
                f"{fmt(x)},{fmt(g)},{fmt(grid.values[i, j])},{int(mask[i, j])}\n"
            )
    return out.getvalue()


def grid_to_json(grid: PhaseGrid) -> str:
    return json.dumps(
        {
            "type": "phase_grid",
            "template": spec_to_dict(grid.template),
            "x_axis": {
                "name": grid.x_axis.name,
                "scale": grid.x_axis.scale,
                "values": [float(v) for v in grid.x_axis.values],
            },
            "y_axis": {
                "name": grid.y_axis.name,
                "scale": grid.y_axis.scale,
                "values": [float(v) for v in grid.y_axis.values],
            },
            "values": [[float(v) for v in row] for row in grid.values],
            "broken_threshold": grid.broken_threshold,
        },
        indent=2,
    )


def grid_from_json(text: str) -> PhaseGrid:
    d = json.loads(text)
    if d.get("type") != "phase_grid":
        raise ValueError("not a phase_grid payload")

    def axis(a) -> AxisSpec:
        return AxisSpec(a["name"], a["scale"], np.array(a["values"]))

    return PhaseGrid(
        template=spec_from_dict(d["template"]),
        x_axis=axis(d["x_axis"]),
        y_axis=axis(d["y_axis"]),
        values=np.array(d["values"]),
        broken_threshold=float(d["broken_threshold"]),
    )


# ---------------------------------------------------------------------------
# boundary tables

def boundary_table_csv(rows) -> str:
    """rows: iterables of (control, exact, perturbative, numeric, rel_gap, mismatch)."""
    out = io.StringIO()
    out.write(
        "control_value,gamma_exact,gamma_perturbative,gamma_numeric,"
        "rel_gap_exact_numeric,validation_mismatch\n"
    )
    for control, exact, pert, numeric, gap, mismatch in rows:
        cells = [fmt(control)]
        for val in (exact, pert, numeric, gap):
            cells.append("" if val is None else fmt(val))
        cells.append(str(int(mismatch)))
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def curve_to_json(curve: BoundaryCurve) -> str:
    return json.dumps(
        {
            "type": "boundary_curve",
            "method": curve.method,
            "points": [[c, g] for c, g in curve.points],
        },
        indent=2,
    )


def curve_from_json(text: str) -> BoundaryCurve:
    d = json.loads(text)
    if d.get("type") != "boundary_curve":
        raise ValueError("not a boundary_curve payload")
    return BoundaryCurve(method=d["method"],
                         points=tuple((c, g) for c, g in d["points"]))
