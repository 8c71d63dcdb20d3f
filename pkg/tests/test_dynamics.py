"""Tests for non-unitary evolution, fidelity traces and steady-state
prediction."""

import math

import numpy as np
import pytest

from epchain import dynamics, linalg, models
from epchain.errors import DimensionMismatch, NoDominantState
from epchain.models import ModelKind, ModelSpec


def xy(N, V=0.0, gamma=0.0):
    return ModelSpec(ModelKind.XY_MAGNON, N=N, V=V, gamma=gamma)


# ---------------------------------------------------------------------------
# evolve_trace

def test_stationary_eigenvector_keeps_unit_fidelity():
    spec = xy(6, V=2.0, gamma=0.0)
    h = models.build_hamiltonian(spec)
    vec = linalg.eig(h).right_vectors[:, 0]
    state = models.StateVector(models.magnon_basis(6), vec)
    trace = dynamics.evolve_trace(spec, state, state, 10.0, 100)
    assert np.all(np.abs(trace.fidelities - 1.0) < 1e-10)


def test_w_runs_fidelity_ordering():
    w = models.target_state("w", 6)
    limits = {}
    for g in (1.05, 1.5):
        spec = xy(6, gamma=g)
        tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                                   w, 200.0, 2000, target_name="w")
        limits[g] = tr.fidelities[-1]
    assert limits[1.05] > limits[1.5]


def test_bell_run_converges_toward_one():
    from epchain import analysis

    template = xy(6, V=10.0)
    target = models.target_state("bell", 6)
    gc = analysis.numeric_boundary_gamma(template, 10.0)
    spec = xy(6, V=10.0, gamma=1.05 * gc)
    tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                               target, 2e5, 2000, target_name="bell")
    assert tr.fidelities[-1] > 0.95


def test_gamma_zero_run_conserves_norm():
    spec = xy(6, V=1.0, gamma=0.0)
    tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                               models.target_state("bell", 6), 50.0, 500)
    assert np.max(np.abs(tr.log_norms)) < 1e-8


def test_renormalization_invariance():
    # per-step renormalized fidelities equal those of the raw (never
    # renormalized) evolution sampled at the same times
    spec = xy(4, gamma=1.3)
    h = models.build_hamiltonian(spec)
    init = models.site_state(4, 1)
    target = models.target_state("w", 4)
    tr = dynamics.evolve_trace(spec, init, target, 8.0, 40)
    tgt = target.amplitudes
    for t, f, ln in zip(tr.times[::7], tr.fidelities[::7], tr.log_norms[::7]):
        raw = linalg.apply_propagator(h, init.amplitudes, t)
        raw_f = abs(np.vdot(tgt, raw / np.linalg.norm(raw)))
        assert f == pytest.approx(raw_f, abs=1e-10)
        assert ln == pytest.approx(math.log(np.linalg.norm(raw)), abs=1e-8)


def test_evolve_trace_validation():
    spec = xy(4, gamma=1.2)
    init = dynamics.default_initial_state(spec)
    target = models.target_state("w", 4)
    with pytest.raises(ValueError):
        dynamics.evolve_trace(spec, init, target, -1.0, 100)
    with pytest.raises(ValueError):
        dynamics.evolve_trace(spec, init, target, 10.0, 1)
    with pytest.raises(DimensionMismatch):
        dynamics.evolve_trace(spec, models.site_state(6, 1), target, 10.0, 100)


def test_default_initial_state_embeddings():
    m = dynamics.default_initial_state(xy(5))
    assert np.argmax(np.abs(m.amplitudes)) == 0
    s = dynamics.default_initial_state(
        ModelSpec(ModelKind.TRANSVERSE_ISING, N=3, Delta=0.5))
    assert np.argmax(np.abs(s.amplitudes)) == 4  # single flip at site 1 (MSB)


# ---------------------------------------------------------------------------
# dominant_state / steady_fidelity

def test_dominant_state_diagonal_case():
    state = dynamics.dominant_state(np.diag([1j, -1j]))
    assert abs(state.amplitudes[0]) == pytest.approx(1.0, abs=1e-12)
    assert abs(state.amplitudes[1]) < 1e-12


def test_dominant_state_unbroken_raises():
    with pytest.raises(NoDominantState):
        dynamics.dominant_state(models.build_h_w(6, 0.5))


def test_dominant_state_degenerate_raises():
    with pytest.raises(NoDominantState):
        dynamics.dominant_state(np.diag([1j, 1j, -1j]))


def test_steady_fidelity_matches_trace_limit():
    spec = xy(6, gamma=1.2)
    w = models.target_state("w", 6)
    tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec), w,
                               200.0, 2000, target_name="w")
    assert abs(tr.fidelities[-1] - dynamics.steady_fidelity(spec, w)) < 1e-6


def test_limit_identity_property():
    # lim f(t) = |<target|dominant>| whenever <dominant|init> != 0
    for g in (1.1, 1.4):
        spec = xy(6, gamma=g)
        w = models.target_state("w", 6)
        tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                                   w, 300.0, 3000, target_name="w")
        assert abs(tr.fidelities[-1]
                   - dynamics.steady_fidelity(spec, w)) < 1e-4


# ---------------------------------------------------------------------------
# decay rate of 1 - f(t)

def _fitted_decay_rate(spec, target, t_max, n_steps):
    tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                               target, t_max, n_steps)
    dev = np.abs(tr.fidelities - tr.fidelities[-1])
    # fit on the clean exponential window
    mask = (dev > 1e-11) & (tr.times > t_max * 0.1) & (tr.times < t_max * 0.7)
    t, y = tr.times[mask], np.log(dev[mask])
    slope, _ = np.polyfit(t, y, 1)
    return -slope


def _im_gap(spec):
    vals = linalg.eig(models.build_hamiltonian(spec)).eigenvalues
    im = np.sort(vals.imag)
    return im[-1] - im[-2]


@pytest.mark.xfail(
    strict=True,
    reason="source-text defect: 1-f(t) decays at the rate of ONE times the "
    "imaginary gap (the subleading eigenvector is not orthogonal to the "
    "target, so the deviation is linear, not quadratic, in the decaying "
    "amplitude ratio); the stated factor 2 disagrees with the measured "
    "rate by a factor ~2",
)
def test_decay_rate_twice_im_gap_as_stated():
    spec = xy(6, gamma=1.2)
    rate = _fitted_decay_rate(spec, models.target_state("w", 6), 120.0, 4000)
    assert rate == pytest.approx(2 * _im_gap(spec), rel=0.10)


def test_decay_rate_matches_im_gap():
    spec = xy(6, gamma=1.2)
    rate = _fitted_decay_rate(spec, models.target_state("w", 6), 120.0, 4000)
    assert rate == pytest.approx(_im_gap(spec), rel=0.10)


# ---------------------------------------------------------------------------
# convergence_time

def test_convergence_time_constant_trace():
    spec = xy(6, V=2.0, gamma=0.0)
    h = models.build_hamiltonian(spec)
    vec = linalg.eig(h).right_vectors[:, 0]
    state = models.StateVector(models.magnon_basis(6), vec)
    tr = dynamics.evolve_trace(spec, state, state, 10.0, 100)
    assert dynamics.convergence_time(tr) == pytest.approx(tr.times[0])


def test_convergence_time_ordering_in_gamma():
    w = models.target_state("w", 6)
    times = {}
    for g in (1.05, 1.5):
        spec = xy(6, gamma=g)
        tr = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                                   w, 200.0, 2000, target_name="w")
        times[g] = dynamics.convergence_time(tr)
    assert times[1.05] > times[1.5]


def test_convergence_time_never_settled_returns_last_sample():
    # |f(s) - f(t_max)| < tol holds vacuously at s = t_max, so a trace that
    # never settles earlier yields the final sample time (the +inf sentinel
    # is unreachable by the definition; kept for defensive completeness)
    tr = dynamics.EvolutionTrace(
        times=np.linspace(1, 10, 10),
        fidelities=np.linspace(0.1, 0.9, 10),
        log_norms=np.zeros(10),
        target_name="w",
        spec=xy(4, gamma=1.2),
        gamma_used=1.2,
    )
    assert dynamics.convergence_time(tr, tol=1e-6) == pytest.approx(10.0)


def test_trace_rejects_bad_arrays():
    spec = xy(4, gamma=1.2)
    with pytest.raises(ValueError):
        dynamics.EvolutionTrace(times=np.array([2.0, 1.0]),
                                fidelities=np.array([0.5, 0.5]),
                                log_norms=np.zeros(2), target_name="w",
                                spec=spec, gamma_used=1.2)
    with pytest.raises(ValueError):
        dynamics.EvolutionTrace(times=np.array([1.0, 2.0]),
                                fidelities=np.array([0.5, 1.5]),
                                log_norms=np.zeros(2), target_name="w",
                                spec=spec, gamma_used=1.2)
