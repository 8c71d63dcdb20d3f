"""Phase-diagram sweeps, boundary extraction and the gamma optimizer.

max|Im eps| over parameter grids is the broken-phase indicator.  The numeric
boundary is located by bisection on that indicator; for the magnon chain the
critical gamma can fall far below double-precision resolution (it decays as
1/V^(N-2)), so the scan escalates to an arbitrary-precision characteristic-
polynomial solve when needed.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import mpmath as mp
import numpy as np

from . import linalg
from .errors import DegenerateFit, NoTransition
from .models import ModelKind, ModelSpec, StateVector, build_hamiltonian

BROKEN_THRESHOLD = 1e-10

# below this critical gamma the double-precision indicator is unreliable
_DOUBLE_PRECISION_FLOOR = 1e-6

# Full-space spectra develop exponentially ill-conditioned eigenvector bases
# near their exceptional points (condition ~ (scale/gap)^N), so eigensolver
# noise in Im(eps) can reach well above 1e-10 just below the true boundary.
# The boundary scan therefore uses this larger indicator threshold for
# 2^N-dimensional models; the square-root growth of the true signal above
# the boundary keeps the induced bias small (~(floor/signal_slope)^2).
_FULL_SPACE_SCAN_FLOOR = 3e-4


@dataclass(frozen=True)
class AxisSpec:
    """One sweep axis: parameter name, scale and sample values."""

    name: str  # "V" | "Delta" | "gamma"
    scale: str  # "log" | "lin"
    values: np.ndarray

    @classmethod
    def from_range(cls, name: str, lo: float, hi: float, scale: str,
                   count: int) -> "AxisSpec":
        if count < 1:
            raise ValueError("axis needs at least one sample")
        if scale == "log":
            if lo <= 0 or hi <= 0:
                raise ValueError(f"log axis {name} requires positive range")
            values = np.geomspace(lo, hi, count)
        elif scale == "lin":
            values = np.linspace(lo, hi, count)
        else:
            raise ValueError(f"unknown scale {scale!r}")
        return cls(name, scale, values)


@dataclass(frozen=True)
class PhaseGrid:
    """max|Im eps| over an (x, gamma) parameter grid, row-major in x."""

    template: ModelSpec
    x_axis: AxisSpec
    y_axis: AxisSpec
    values: np.ndarray
    broken_threshold: float = BROKEN_THRESHOLD

    @property
    def broken_mask(self) -> np.ndarray:
        return self.values > self.broken_threshold


@dataclass(frozen=True)
class BoundaryCurve:
    """(control parameter, critical gamma) points from one extraction method."""

    method: str  # "exact_epts" | "perturbative" | "numeric_scan"
    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple(sorted((float(c), float(g)) for c, g in self.points))
        if any(g <= 0 for _, g in pts):
            raise ValueError("critical gamma must be positive")
        object.__setattr__(self, "points", pts)

    @property
    def controls(self) -> np.ndarray:
        return np.array([c for c, _ in self.points])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([g for _, g in self.points])


def max_im_epsilon(m) -> float:
    """Largest |Im eps| over the spectrum (residual-verified decomposition)."""
    spectrum = linalg.eig(m)
    return float(np.max(np.abs(spectrum.eigenvalues.imag)))


def _with_params(template: ModelSpec, name: str, value: float) -> ModelSpec:
    if name not in ("V", "Delta", "gamma"):
        raise ValueError(f"unknown sweep parameter {name!r}")
    return replace(template, **{name: float(value)})


def _sweep_workers() -> int:
    env = os.environ.get("EPCHAIN_THREADS", "")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def sweep_grid(template: ModelSpec, x_axis: AxisSpec, y_axis: AxisSpec) -> PhaseGrid:
    """Evaluate max|Im eps| at every grid node, deterministic row-major order.

    Per-node failures are recorded as NaN; the grid is still returned.
    """
    if y_axis.name != "gamma":
        raise ValueError("the sweep y-axis must be gamma")
    nodes = [
        (i, j, _with_params(_with_params(template, x_axis.name, x),
                            "gamma", g))
        for i, x in enumerate(x_axis.values)
        for j, g in enumerate(y_axis.values)
    ]

    def node_value(spec: ModelSpec) -> float:
        try:
            return max_im_epsilon(build_hamiltonian(spec))
        except Exception:
            return float("nan")

    values = np.empty((len(x_axis.values), len(y_axis.values)))
    with ThreadPoolExecutor(max_workers=_sweep_workers()) as pool:
        for (i, j, _), val in zip(nodes, pool.map(node_value,
                                                  (s for _, _, s in nodes))):
            values[i, j] = val
    return PhaseGrid(template=template, x_axis=x_axis, y_axis=y_axis, values=values)


# ---------------------------------------------------------------------------
# high-precision spectrum of the magnon chain (tridiagonal charpoly roots)

def _magnon_charpoly(N: int, V, g):
    """Coefficients (low to high) of det(E - H) via the 3-term recurrence."""
    diag = [mp.mpc(V, g)] + [mp.mpc(0)] * (N - 2) + [mp.mpc(V, -g)]
    p_prev = [mp.mpc(1)]
    p = [-diag[0], mp.mpc(1)]
    for j in range(1, N):
        shifted = [mp.mpc(0)] + p
        new = [shifted[i] + (-diag[j] * p[i] if i < len(p) else 0)
               for i in range(len(shifted))]
        for i in range(len(p_prev)):
            new[i] -= p_prev[i]
        p_prev, p = p, new
    return p


def _magnon_max_im(N: int, V, g, dps: int):
    with mp.workdps(dps):
        coeffs = _magnon_charpoly(N, V, g)
        roots = mp.polyroots(list(reversed(coeffs)), maxsteps=2000,
                             extraprec=4 * dps)
        return max(abs(mp.im(r)) for r in roots)


def _numeric_boundary_highprec(N: int, V: float, rel_tol: float,
                               dps: int = 60) -> float:
    """Bisection on the arbitrary-precision indicator (XY magnon chain)."""
    with mp.workdps(dps):
        threshold = mp.mpf(10) ** -30 * (1 + abs(V))

        def broken(g) -> bool:
            return _magnon_max_im(N, V, g, dps) > threshold

        lo, hi = mp.mpf(10) ** -45, mp.mpf(10)
        if broken(lo) or not broken(hi):
            raise NoTransition(f"no transition in gamma for N={N}, V={V}")
        iterations = int(math.ceil(math.log2(float(mp.log(hi / lo)) / rel_tol))) + 2
        for _ in range(iterations):
            mid = mp.sqrt(lo * hi)
            if broken(mid):
                hi = mid
            else:
                lo = mid
        return float(mp.sqrt(lo * hi))


def numeric_boundary_gamma(template: ModelSpec, control_value: float,
                           rel_tol: float = 1e-6,
                           threshold: float = BROKEN_THRESHOLD) -> float:
    """Critical gamma from the diagonalization scan, relative rel_tol.

    control_value sets V (XY) or Delta (Ising).  Bisection on the indicator
    max|Im eps| > threshold * (1 + |control|); escalates to the
    arbitrary-precision path when the transition sits below double-precision
    resolution (only supported for the magnon chain).
    """
    name = "Delta" if template.kind is ModelKind.TRANSVERSE_ISING else "V"
    base = _with_params(template, name, control_value)
    scaled_threshold = threshold * (1 + abs(control_value))
    if template.kind is not ModelKind.XY_MAGNON:
        scaled_threshold = max(scaled_threshold,
                               _FULL_SPACE_SCAN_FLOOR * (1 + control_value ** 2))

    def broken(g: float) -> bool:
        h = build_hamiltonian(_with_params(base, "gamma", g))
        return max_im_epsilon(h) > scaled_threshold

    lo, hi = 1e-12, 10.0
    if not broken(hi):
        raise NoTransition(
            f"spectrum stays real up to gamma=10 at {name}={control_value}"
        )
    if broken(lo):
        lo = 0.0  # transition below double resolution
    if lo == 0.0 or math.sqrt(lo * hi) < _DOUBLE_PRECISION_FLOOR:
        if template.kind is not ModelKind.XY_MAGNON:
            raise NoTransition(
                "transition below double-precision resolution for a "
                "non-tridiagonal model"
            )
        return _numeric_boundary_highprec(template.N, control_value, rel_tol)
    iterations = int(math.ceil(math.log2(math.log(hi / lo) / rel_tol))) + 2
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        if broken(mid):
            hi = mid
        else:
            lo = mid
    gc = math.sqrt(lo * hi)
    if gc < _DOUBLE_PRECISION_FLOOR and template.kind is ModelKind.XY_MAGNON:
        return _numeric_boundary_highprec(template.N, control_value, rel_tol)
    return gc


def boundary_curve(method: str, template: ModelSpec,
                   control_values) -> BoundaryCurve:
    """Boundary points over a list of control values, by the named method."""
    from . import bethe  # local import avoids a cycle via exact-boundary validation

    points = []
    for control in control_values:
        if method == "numeric_scan":
            gc = numeric_boundary_gamma(template, control)
        elif method == "exact_epts":
            gc = bethe.exact_boundary_gamma(template.N, control)
        elif method == "perturbative":
            gc = bethe.perturbative_boundary(template.N, control)
        else:
            raise ValueError(f"unknown boundary method {method!r}")
        points.append((control, gc))
    return BoundaryCurve(method=method, points=tuple(points))


def fit_boundary_slope(curve: BoundaryCurve) -> float:
    """Least-squares slope of ln(gamma_c) versus ln(control)."""
    if len(curve.points) < 3:
        raise DegenerateFit("need at least 3 boundary points")
    x = np.log(curve.controls)
    y = np.log(curve.gammas)
    if np.ptp(x) == 0:
        raise DegenerateFit("boundary points share one control value")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def optimize_gamma(template: ModelSpec, target: StateVector, t_max: float,
                   n_steps: int = 2000, iterations: int = 30,
                   init: StateVector | None = None) -> tuple[float, float]:
    """Golden-section maximization of f(t_max) over gamma in (gamma_c, 10 gamma_c].

    Returns (best gamma, fidelity at t_max).  The broken region is located
    with the numeric boundary scan first; NoTransition propagates if there is
    none.
    """
    from .dynamics import default_initial_state, evolve_trace

    control = template.Delta if template.kind is ModelKind.TRANSVERSE_ISING else template.V
    gamma_c = numeric_boundary_gamma(template, control)
    if init is None:
        init = default_initial_state(template)

    def fidelity_at(g: float) -> float:
        spec = _with_params(template, "gamma", g)
        trace = evolve_trace(spec, init, target, t_max, n_steps)
        return trace.fidelities[-1]

    lo, hi = gamma_c * (1 + 1e-9), gamma_c * 10.0
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - (hi - lo) * invphi
    d = lo + (hi - lo) * invphi
    fc, fd = fidelity_at(c), fidelity_at(d)
    for _ in range(iterations):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - (hi - lo) * invphi
            fc = fidelity_at(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + (hi - lo) * invphi
            fd = fidelity_at(d)
    best = c if fc > fd else d
    return float(best), float(max(fc, fd))
