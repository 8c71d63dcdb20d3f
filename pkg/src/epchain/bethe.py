"""Closed-form analytics of the open chain with imaginary boundary fields.

Scattering and bound-state quantization conditions, the double-root
equations locating exceptional points, the exact phase-boundary condition
for |V| > 2, and the large-V effective two-site model for the end sites.

Transcription notes (verified against exact diagonalization):

* For even N the complex-pair equation at V=0 is
  gamma^2 cosh[(N-1) kappa] = cosh[(N+1) kappa]
  (obtained from the scattering condition at k = pi/2 + i kappa).  The
  published sinh form has no root matching the spectrum for gamma slightly
  above 1 and is implemented here in the cosh form.
* The closed-form large-V coefficient published for the effective end-to-end
  coupling vanishes identically for even N; the n-sum itself decays as
  1/V^(N-2) (it equals 1/U_{N-2}(V/2), a monic Chebyshev polynomial of the
  second kind), so the phase boundary falls with log-log slope -(N-2), not
  -2.  The n-sums are authoritative everywhere in this module.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateOmega,
    NoBracket,
    NoRoot,
    NonConvergence,
    NullSpaceRankError,
    ValidationMismatch,
)
from .models import StateVector, build_h_w, magnon_basis, target_state

ROOT_RESIDUAL_TOL = 1e-10
SCAN_SAMPLES = 10_000


@dataclass(frozen=True)
class BetheRoot:
    """One accepted root of a quantization condition.

    momentum is the real wave number k for scattering roots, or the (possibly
    complex) decay rate kappa for bound roots.  energy is 2 cos k or
    2 cosh kappa.  residual is the absolute value of the defining function at
    the root.
    """

    kind: str  # "scattering" | "bound"
    momentum: complex
    energy: complex
    residual: float


@dataclass(frozen=True)
class EtaFactors:
    """Auxiliary combinations entering the exact phase-boundary condition."""

    eta_plus: float   # 1 + V^2 + gamma^2
    eta_minus: float  # 1 - V^2 - gamma^2
    c: complex        # cosh(kappa) at the bound-state exceptional point
    F_factor: float   # V (2N eta+ + eta-) / (4N (eta+ - 1))


@dataclass(frozen=True)
class EffectiveModel:
    """Large-V effective two-site model for the chain's end sites.

    lambda_eff and V_eff are the authoritative n-sums.  Omega is the
    published closed-form large-V coefficient, kept for reference; it
    vanishes identically for even N.  The actual asymptotics are
    lambda_eff ~ asymptotic_coeff / V**asymptotic_power.
    """

    N: int
    V: float
    theta: float
    phi: np.ndarray
    Omega: float
    lambda_eff: float
    V_eff: float
    asymptotic_power: int
    asymptotic_coeff: float


# ---------------------------------------------------------------------------
# scattering branch (real k)

def scattering_F(k: float, N: int, gamma: float) -> float:
    """Quantization function sin[k(N+1)] + gamma^2 sin[k(N-1)] at V = 0."""
    return math.sin(k * (N + 1)) + gamma ** 2 * math.sin(k * (N - 1))


def scattering_condition(k: float, N: int, V: float, gamma: float) -> float:
    """General real-k quantization function, reducing to scattering_F at V=0.

    sin[k(N+1)] - 2V sin[kN] + (V^2+gamma^2) sin[k(N-1)]; vanishes exactly on
    the real scattering momenta of the chain.
    """
    return (
        math.sin(k * (N + 1))
        - 2.0 * V * math.sin(k * N)
        + (V ** 2 + gamma ** 2) * math.sin(k * (N - 1))
    )


def scattering_roots(N: int, gamma: float, V: float = 0.0,
                     samples: int = SCAN_SAMPLES) -> list[BetheRoot]:
    """All real scattering momenta in (0, pi), by grid bracketing + brentq."""
    eps = math.pi / (10 * samples)
    grid = np.linspace(eps, math.pi - eps, samples)
    vals = np.array([scattering_condition(k, N, V, gamma) for k in grid])
    roots: list[BetheRoot] = []
    for i in range(len(grid) - 1):
        if vals[i] == 0.0:
            k0 = float(grid[i])
        elif vals[i] * vals[i + 1] < 0:
            k0 = brentq(scattering_condition, grid[i], grid[i + 1],
                        args=(N, V, gamma), xtol=1e-15, rtol=8.9e-16)
        else:
            continue
        res = abs(scattering_condition(k0, N, V, gamma))
        if res < ROOT_RESIDUAL_TOL:
            roots.append(BetheRoot("scattering", k0, 2.0 * math.cos(k0), res))
    return roots


def scattering_ep(N: int, k0: float = 1.5, gamma0: float = 0.9,
                  max_iter: int = 100) -> tuple[float, float]:
    """Exceptional point of the scattering branch: F = dF/dk = 0.

    Two-dimensional Newton iteration in (k, gamma); for even N the solution
    is (pi/2, 1).
    """
    if N % 2 != 0:
        raise ValueError("scattering_ep requires even N")
    k, g = k0, gamma0
    for _ in range(max_iter):
        f1 = math.sin(k * (N + 1)) + g ** 2 * math.sin(k * (N - 1))
        f2 = (N + 1) * math.cos(k * (N + 1)) + g ** 2 * (N - 1) * math.cos(k * (N - 1))
        j11 = f2
        j12 = 2 * g * math.sin(k * (N - 1))
        j21 = -(N + 1) ** 2 * math.sin(k * (N + 1)) - g ** 2 * (N - 1) ** 2 * math.sin(k * (N - 1))
        j22 = 2 * g * (N - 1) * math.cos(k * (N - 1))
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            raise NonConvergence("singular Jacobian in scattering_ep")
        dk = (f1 * j22 - f2 * j12) / det
        dg = (f2 * j11 - f1 * j21) / det
        k, g = k - dk, g - dg
        if abs(dk) < 1e-14 and abs(dg) < 1e-14:
            break
    else:
        raise NonConvergence("scattering_ep Newton did not converge")
    res1 = abs(scattering_F(k, N, g))
    res2 = abs((N + 1) * math.cos(k * (N + 1)) + g ** 2 * (N - 1) * math.cos(k * (N - 1)))
    if res1 > 1e-12 or res2 > 1e-12:
        raise NonConvergence("scattering_ep residuals too large")
    return k, abs(g)


def broken_pair_kappa(N: int, gamma: float) -> BetheRoot:
    """Decay rate of the complex-conjugate pair at V=0, gamma > 1.

    Solves gamma^2 cosh[(N-1)k] = cosh[(N+1)k] (even-N form of the
    quantization condition at momentum pi/2 + i k); the pair energies are
    +-2i sinh(k).
    """
    if gamma <= 1.0:
        raise NoRoot(f"gamma={gamma} <= 1: spectrum is real (unbroken phase)")

    def g(k: float) -> float:
        return gamma ** 2 * math.cosh((N - 1) * k) - math.cosh((N + 1) * k)

    hi = math.log(gamma) + 1.0
    while g(hi) > 0:
        hi *= 2.0
    kappa = brentq(g, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    return BetheRoot("bound", complex(math.pi / 2, kappa),
                     2j * math.sinh(kappa), abs(g(kappa)))


# ---------------------------------------------------------------------------
# bound-state branch (real or complex kappa)

def bound_digamma(kappa, N: int, V: float, gamma: float):
    """Bound-state quantization function
    sinh[(N+1)k] - 2V sinh[Nk] + (V^2+gamma^2) sinh[(N-1)k].

    Accepts real or complex kappa.
    """
    sinh = cmath.sinh if isinstance(kappa, complex) else math.sinh
    out = (
        sinh((N + 1) * kappa)
        - 2.0 * V * sinh(N * kappa)
        + (V ** 2 + gamma ** 2) * sinh((N - 1) * kappa)
    )
    return out


def _bound_digamma_deriv(kappa: complex, N: int, V: float, gamma: float) -> complex:
    return (
        (N + 1) * cmath.cosh((N + 1) * kappa)
        - 2.0 * V * N * cmath.cosh(N * kappa)
        + (V ** 2 + gamma ** 2) * (N - 1) * cmath.cosh((N - 1) * kappa)
    )


def real_bound_roots(N: int, V: float, gamma: float,
                     samples: int = SCAN_SAMPLES) -> list[BetheRoot]:
    """Real kappa > 0 roots of the bound-state condition (unbroken phase)."""
    kmax = math.acosh(max(abs(V), 2.0)) + 2.0
    grid = np.linspace(1e-9, kmax, samples)
    vals = np.array([bound_digamma(k, N, V, gamma) for k in grid])
    roots: list[BetheRoot] = []
    for i in range(len(grid) - 1):
        if vals[i] * vals[i + 1] < 0:
            k0 = brentq(bound_digamma, grid[i], grid[i + 1],
                        args=(N, V, gamma), xtol=1e-15, rtol=8.9e-16)
            res = abs(bound_digamma(k0, N, V, gamma))
            if res < ROOT_RESIDUAL_TOL * (1 + V ** 2) * math.cosh(N * k0):
                roots.append(BetheRoot("bound", k0, 2.0 * math.cosh(k0), res))
    return roots


def complex_bound_pair(N: int, V: float, gamma: float,
                       max_iter: int = 200) -> list[BetheRoot]:
    """Complex-conjugate bound pair in the broken phase, |V| > 2.

    Newton iteration on the bound-state condition in complex kappa, seeded
    from the effective two-site model (independently of any matrix
    diagonalization).
    """
    if abs(V) <= 2:
        raise NoRoot("complex bound pair requires |V| > 2")
    eff = effective_model(N, abs(V))
    lam = eff.lambda_eff
    im_seed = math.sqrt(max(gamma ** 2 - lam ** 2, 1e-30))
    eps_seed = complex(abs(V) + eff.V_eff, im_seed)
    kappa = cmath.acosh(eps_seed / 2.0)
    for _ in range(max_iter):
        f = bound_digamma(kappa, N, abs(V), gamma)
        df = _bound_digamma_deriv(kappa, N, abs(V), gamma)
        if df == 0:
            raise NonConvergence("zero derivative in complex_bound_pair")
        step = f / df
        kappa -= step
        if abs(step) < 1e-15 * (1 + abs(kappa)):
            break
    else:
        raise NonConvergence("complex bound pair Newton did not converge")
    scale = (1 + V ** 2) * abs(cmath.cosh(N * kappa))
    res = abs(bound_digamma(kappa, N, abs(V), gamma))
    if res > 1e-8 * scale:
        raise NonConvergence(f"bound pair residual {res:.3e} too large")
    energy = 2.0 * cmath.cosh(kappa)
    sign = 1.0 if V >= 0 else -1.0
    pair = [
        BetheRoot("bound", kappa, sign * energy, res),
        BetheRoot("bound", kappa.conjugate(), sign * energy.conjugate(), res),
    ]
    return pair


def all_bethe_energies(N: int, V: float, gamma: float) -> list[complex]:
    """Combined scattering + bound energy multiset for the supported regimes.

    Supported: V = 0 (any gamma != 1) and |V| > 2.  The caller is expected to
    check completeness against the matrix dimension.
    """
    energies = [r.energy for r in scattering_roots(N, gamma, V=V)]
    if V == 0.0:
        if gamma > 1.0:
            root = broken_pair_kappa(N, gamma)
            energies += [root.energy, -root.energy]
    elif abs(V) > 2:
        real_roots = real_bound_roots(N, V, gamma)
        if len(energies) + len(real_roots) >= N:
            energies += [r.energy for r in real_roots[:N - len(energies)]]
        else:
            energies += [r.energy for r in complex_bound_pair(N, V, gamma)]
    return energies


# ---------------------------------------------------------------------------
# exact phase boundary, |V| > 2

def eta_factors(N: int, V: float, gamma: float) -> EtaFactors:
    """eta+-, the closed-form cosh(kappa) at the bound EP, and its prefactor."""
    ep = 1.0 + V ** 2 + gamma ** 2
    em = 1.0 - V ** 2 - gamma ** 2
    F = V * (2 * N * ep + em) / (4 * N * (ep - 1.0))
    disc = 1.0 - 4 * N * (ep - 1.0) * (N * em ** 2 + ep * em + 4 * N * V ** 2) / (
        V ** 2 * (2 * N * ep + em) ** 2
    )
    c = F * (1.0 + cmath.sqrt(disc))
    return EtaFactors(eta_plus=ep, eta_minus=em, c=c, F_factor=F)


def _boundary_log_residual(N: int, V, g):
    """log(LHS) - log(RHS) of the exact-boundary condition, in mpmath reals.

    Returns an mpc when the closed-form cosh(kappa) leaves the real branch
    (no bound EP at this gamma).
    """
    ep = 1 + V ** 2 + g ** 2
    em = 1 - V ** 2 - g ** 2
    F = V * (2 * N * ep + em) / (4 * N * (ep - 1))
    disc = 1 - 4 * N * (ep - 1) * (N * em ** 2 + ep * em + 4 * N * V ** 2) / (
        V ** 2 * (2 * N * ep + em) ** 2
    )
    c = F * (1 + mp.sqrt(disc))
    s = mp.sqrt(c ** 2 - 1)
    num = ep * c - 2 * V - em * s
    den = ep * c - 2 * V + em * s
    return 2 * N * mp.log(c + s) - (mp.log(abs(num)) - mp.log(abs(den)))


def exact_boundary_gamma(N: int, V: float, validate: bool = False,
                         rel_tol: float = 1e-3, dps: int = 60) -> float:
    """Critical gamma of the bound-state exceptional point, |V| > 2.

    Solves the closed-form boundary condition by bisection in gamma, in
    arbitrary precision (the balance involves terms like (c+sqrt(c^2-1))^2N,
    and gamma_c itself falls below double-precision resolution at large V).
    With validate=True the result is cross-checked against the
    diagonalization scan and ValidationMismatch is raised on disagreement.
    """
    if abs(V) <= 2:
        raise ValueError("exact_boundary_gamma requires |V| > 2")
    v = abs(V)  # gamma_c is even in V (staggered gauge flips the band sign)
    with mp.workdps(dps):
        vv = mp.mpf(v)

        def f(g):
            return _boundary_log_residual(N, vv, g)

        hi = mp.mpf(1)
        while isinstance(f(hi), mp.mpc) or not mp.isfinite(f(hi)):
            hi = hi / 2
            if hi < mp.mpf(10) ** -50:
                raise NoBracket("no real-branch gamma found below 1")
        lo = mp.mpf(10) ** -50
        flo, fhi = f(lo), f(hi)
        if flo * fhi > 0:
            raise NoBracket(
                f"no sign change of the boundary condition in [{float(lo)}, {float(hi)}]"
            )
        for _ in range(240):
            mid = mp.sqrt(lo * hi)
            if f(mid) * flo > 0:
                lo = mid
            else:
                hi = mid
        gc = float(mp.sqrt(lo * hi))
    if validate:
        from .analysis import numeric_boundary_gamma  # local import: no cycle
        from .models import ModelKind, ModelSpec
        template = ModelSpec(ModelKind.XY_MAGNON, N=N, V=v)
        gn = numeric_boundary_gamma(template, v)
        if abs(gc - gn) / gn > rel_tol:
            raise ValidationMismatch(
                f"exact boundary {gc:.6e} vs numeric scan {gn:.6e} "
                f"(relative {abs(gc - gn) / gn:.2e} > {rel_tol:.0e}); "
                "the numeric value is authoritative"
            )
    return gc


# ---------------------------------------------------------------------------
# perturbative effective model, |V| >> 1

def effective_model(N: int, V: float) -> EffectiveModel:
    """Effective end-site potential and end-to-end coupling from the n-sums."""
    if N % 2 != 0 or N < 6:
        raise ValueError("effective_model requires even N >= 6")
    if abs(V) <= 2:
        raise ValueError("effective_model requires |V| > 2")
    theta = math.pi / (2 * (N - 1))
    n = np.arange(2, N)
    phi = 2 * (n - 1) * theta
    den = V - 2 * np.cos(phi)
    if np.min(np.abs(den)) < 1e-12:
        raise DegenerateOmega("effective-model denominator (near) zero")
    v_eff = (2.0 / (N - 1)) * float(np.sum(np.sin(phi) ** 2 / den))
    lam = (2.0 / (N - 1)) * float(np.sum(np.sin(phi) * np.sin((N - 2) * phi) / den))
    # Published closed-form large-V coefficient (identically 0 for even N).
    d1 = (N - 1) * math.sin((N - 4) * theta)
    d2 = (N - 1) * math.sin(N * theta)
    if abs(d1) < 1e-12 or abs(d2) < 1e-12:
        raise DegenerateOmega("closed-form coefficient denominator (near) zero")
    omega = (
        math.cos((N - 4) * math.pi / 2) * math.sin((N - 4) * (N - 2) * theta) / d1
        - (-1) ** (N // 2) * math.sin((N - 2) * N * theta) / d2
    )
    return EffectiveModel(
        N=N, V=V, theta=theta, phi=phi, Omega=omega,
        lambda_eff=lam, V_eff=v_eff,
        asymptotic_power=N - 2, asymptotic_coeff=1.0,
    )


def effective_spectrum(
    N: int, V: float, gamma: float
) -> tuple[np.ndarray, StateVector | None]:
    """Bound-pair eigenvalues of the effective two-site model.

    Returns (+-sqrt(lambda^2 - gamma^2) + V + V_eff) and, when gamma equals
    |lambda_eff| to relative 1e-9, the Dirac-normalized coalescent state
    i gamma |1> + lambda |N> (close to the two-site Bell target).
    """
    eff = effective_model(N, V)
    lam = eff.lambda_eff
    shift = V + eff.V_eff
    root = cmath.sqrt(complex(lam ** 2 - gamma ** 2))
    eigenvalues = np.array([shift + root, shift - root])
    coalescent = None
    if abs(gamma - abs(lam)) <= 1e-9 * max(abs(lam), 1e-300):
        amps = np.zeros(N, dtype=complex)
        amps[0] = 1j * gamma
        amps[N - 1] = lam
        amps /= np.linalg.norm(amps)
        coalescent = StateVector(magnon_basis(N), amps)
    return eigenvalues, coalescent


def perturbative_boundary(N: int, V: float) -> float:
    """Perturbative critical gamma: EP of the effective model at |lambda_eff|.

    The published large-V form |Omega|/V^2 is not usable (its coefficient
    vanishes identically for even N); the n-sum coupling itself is the
    perturbative boundary and decays as 1/V^(N-2).
    """
    return abs(effective_model(N, V).lambda_eff)


# ---------------------------------------------------------------------------
# scattering eigenstates, V = 0

def bethe_scattering_state(k: float, N: int, gamma: float,
                           root_tol: float = ROOT_RESIDUAL_TOL) -> StateVector:
    """Assemble the V=0 scattering eigenstate A e^{ikj} + B e^{-ikj}.

    (A, B) is the null vector of the 2x2 boundary-matching matrix; the result
    is Dirac-normalized and satisfies ||H psi - 2cos(k) psi|| < 1e-8.
    """
    if abs(scattering_F(k, N, gamma)) > root_tol:
        raise ValueError(f"k={k} is not a root of the quantization condition")
    eps_k = 2.0 * math.cos(k)
    up = 1j * gamma - eps_k
    um = -1j * gamma - eps_k
    m = np.array(
        [
            [up * np.exp(1j * k) + np.exp(2j * k),
             up * np.exp(-1j * k) + np.exp(-2j * k)],
            [um * np.exp(1j * k * N) + np.exp(1j * k * (N - 1)),
             um * np.exp(-1j * k * N) + np.exp(-1j * k * (N - 1))],
        ]
    )
    _, svals, vh = np.linalg.svd(m)
    if svals[1] > 1e-8 * max(svals[0], 1.0):
        raise NullSpaceRankError(f"no null vector: singular values {svals}")
    if svals[0] < 1e-8:
        raise NullSpaceRankError("null space is not one-dimensional")
    a, b = vh[1].conj()
    j = np.arange(1, N + 1)
    amps = a * np.exp(1j * k * j) + b * np.exp(-1j * k * j)
    amps /= np.linalg.norm(amps)
    state = StateVector(magnon_basis(N), amps)
    h = build_h_w(N, gamma)
    residual = np.linalg.norm(h @ amps - eps_k * amps)
    if residual > 1e-8:
        raise NonConvergence(f"eigenstate residual {residual:.3e} exceeds 1e-8")
    return state


def w_state_overlap_phase(N: int, gamma: float = 1.0) -> complex:
    """Overlap of the k=pi/2 scattering state with the W target (|.|=1 at the EP)."""
    state = bethe_scattering_state(math.pi / 2, N, gamma)
    w = target_state("W", N)
    return complex(np.vdot(w.amplitudes, state.amplitudes))
