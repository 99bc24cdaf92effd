"""Linear stability analysis around homogeneous steady states.

Perturbations proportional to cos(k x) evolve under the 2x2 matrix
M_k = -k^2 A + B, where A collects diffusion/taxis coefficients and B is
the reaction Jacobian.  Temporal eigenvalues rho solve

    rho^2 + a(D, k^2) rho + b(D, k^2) = 0,

with a = -trace(M_k) and b = det(M_k).  For the Rosenzweig-MacArthur
interaction without predator competition these coefficients reduce to

    a = (d* + D) k^2 - beta1,
    b = d* D k^4 - beta2 k^2 + beta3,

which drives the bifurcation curves and instability-band computations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .model import (
    Equilibrium,
    EquilibriumKind,
    KineticsKind,
    KineticsModel,
    MotilityModel,
)

__all__ = [
    "LinearizedSystem",
    "StabilityClass",
    "DispersionPoint",
    "BetaCoefficients",
    "BifurcationCurve",
    "Mode",
    "MinStabilizingD",
    "linearize",
    "dispersion",
    "beta_coefficients",
    "bifurcation_curves",
    "steady_band",
    "steady_band_threshold",
    "hopf_band",
    "unstable_modes",
    "min_stabilizing_D",
]

MARGINAL_TOL = 1e-12


@dataclass(frozen=True)
class LinearizedSystem:
    """Diffusion/taxis matrix A and reaction Jacobian B at a steady state.

    A = [[d(v_s), -u_s*chi(v_s)], [0, D]]; B is the exact Jacobian of the
    reaction terms, valid at any of the three homogeneous states.
    """

    A: np.ndarray
    B: np.ndarray
    eq: Equilibrium

    @property
    def d_star(self) -> float:
        return float(self.A[0, 0])

    @property
    def D(self) -> float:
        return float(self.A[1, 1])

    @property
    def taxis(self) -> float:
        """u_s * chi(v_s), the cross-diffusion strength."""
        return -float(self.A[0, 1])

    def M(self, k: float) -> np.ndarray:
        return -(k * k) * self.A + self.B


def linearize(
    kin: KineticsModel, mot: MotilityModel, D: float, eq: Equilibrium
) -> LinearizedSystem:
    """Linearize the reaction-diffusion-taxis system at a steady state."""
    if eq.residual >= 1e-10:
        raise ValueError(f"equilibrium residual {eq.residual:.3e} too large")
    u_s, v_s = eq.u, eq.v
    Fv = float(kin.F(v_s))
    Fpv = float(kin.F_prime(v_s))
    B = np.array(
        [
            [kin.gamma * Fv - kin.theta - 2.0 * kin.alpha * u_s, kin.gamma * u_s * Fpv],
            [-Fv, -u_s * Fpv + float(kin.f_prime(v_s))],
        ]
    )
    A = np.array([[float(mot.d(v_s)), -u_s * float(mot.chi(v_s))], [0.0, D]])
    return LinearizedSystem(A, B, eq)


class StabilityClass(Enum):
    STABLE = "stable"
    HOPF_UNSTABLE = "hopf_unstable"
    STEADY_UNSTABLE = "steady_unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class DispersionPoint:
    """Characteristic-polynomial data of M_k at one wavenumber."""

    k: float
    a: float
    b: float
    delta: float
    rho: tuple[complex, complex]
    klass: StabilityClass

    @property
    def max_growth(self) -> float:
        return max(self.rho[0].real, self.rho[1].real)


def _quadratic_roots(a: float, b: float, delta: float) -> tuple[complex, complex]:
    """Roots of rho^2 + a rho + b = 0 without subtractive cancellation."""
    if delta >= 0.0:
        s = math.sqrt(delta)
        q = -0.5 * (a + math.copysign(s, a) if a != 0.0 else s)
        if q == 0.0:
            return (complex(0.0), complex(0.0))
        return (complex(q), complex(b / q))
    half = math.sqrt(-delta) / 2.0
    return (complex(-a / 2.0, half), complex(-a / 2.0, -half))


def dispersion(sys: LinearizedSystem, k: float) -> DispersionPoint:
    """Eigenvalue pair and instability class at wavenumber k >= 0."""
    if k < 0:
        raise ValueError("wavenumber must be >= 0")
    d, D = sys.d_star, sys.D
    B1, B2 = float(sys.B[0, 0]), float(sys.B[0, 1])
    B3, B4 = float(sys.B[1, 0]), float(sys.B[1, 1])
    k2 = k * k
    a = (d + D) * k2 - (B1 + B4)
    b = (
        d * D * k2 * k2
        - (d * B4 + sys.taxis * B3 + B1 * D) * k2
        + (B1 * B4 - B2 * B3)
    )
    delta = a * a - 4.0 * b
    rho = _quadratic_roots(a, b, delta)
    max_re = max(rho[0].real, rho[1].real)
    if abs(max_re) <= MARGINAL_TOL:
        klass = StabilityClass.MARGINAL
    elif max_re < 0.0:
        klass = StabilityClass.STABLE
    elif delta < 0.0 and a < 0.0:
        klass = StabilityClass.HOPF_UNSTABLE
    else:
        klass = StabilityClass.STEADY_UNSTABLE
    return DispersionPoint(k, a, b, delta, rho, klass)


@dataclass(frozen=True)
class BetaCoefficients:
    """Coefficients of a(D,k^2) = (d*+D)k^2 - beta1 and
    b(D,k^2) = d*D k^4 - beta2 k^2 + beta3 at the coexistence state of the
    Rosenzweig-MacArthur interaction without predator competition."""

    beta1: float
    beta2: float
    beta3: float

    def a(self, D: float, d_star: float, k2) -> float:
        return (d_star + D) * k2 - self.beta1

    def b(self, D: float, d_star: float, k2):
        return d_star * D * k2 * k2 - self.beta2 * k2 + self.beta3

    def discriminant(self, D: float, d_star: float, k2):
        c1 = (D + d_star) * self.beta1 - 2.0 * self.beta2
        return (
            (D - d_star) ** 2 * k2 * k2
            - 2.0 * c1 * k2
            + (self.beta1**2 - 4.0 * self.beta3)
        )


def beta_coefficients(
    kin: KineticsModel, mot: MotilityModel, eq: Equilibrium
) -> BetaCoefficients:
    """Closed-form dispersion coefficients for the RM coexistence state.

    Requires Rosenzweig-MacArthur kinetics with alpha = 0 and a coexistence
    equilibrium.
    """
    if kin.kind is not KineticsKind.ROSENZWEIG_MACARTHUR or kin.alpha != 0.0:
        raise ValueError("beta coefficients require RM kinetics with alpha = 0")
    if eq.kind is not EquilibriumKind.COEXISTENCE:
        raise ValueError("beta coefficients are defined at the coexistence state")
    mu, K, lam = kin.mu, kin.K, kin.lam
    v = eq.v
    beta1 = mu * v * (K - lam - 2.0 * v) / (K * (lam + v))
    beta2 = beta1 * float(mot.d(v)) - mu * v * (K - v) * float(mot.chi(v)) / K
    beta3 = lam * kin.theta * mu * (K - v) / (K * (lam + v))
    return BetaCoefficients(beta1, beta2, beta3)


@dataclass(frozen=True)
class BifurcationCurve:
    """Loci in (D, eta = k^2) space of zero-real-part eigenvalues.

    D_H solves a(D, eta) = 0 (oscillatory onset), D_S solves b(D, eta) = 0
    (stationary onset).  Negative values simply mean no positive D lies on
    the curve at that eta.
    """

    eta: np.ndarray
    D_H: np.ndarray
    D_S: np.ndarray


def bifurcation_curves(
    kin: KineticsModel, mot: MotilityModel, eq: Equilibrium, eta_grid
) -> BifurcationCurve:
    """Evaluate both bifurcation curves on a grid of eta = k^2 > 0."""
    eta = np.asarray(eta_grid, dtype=float)
    if np.any(eta <= 0):
        raise ValueError("eta grid must be positive")
    beta = beta_coefficients(kin, mot, eq)
    d = float(mot.d(eq.v))
    D_H = beta.beta1 / eta - d
    D_S = beta.beta2 / (d * eta) - beta.beta3 / (d * eta * eta)
    return BifurcationCurve(eta, D_H, D_S)


def steady_band(
    beta: BetaCoefficients, D: float, d_star: float
) -> tuple[float, float] | None:
    """k^2 interval where b(D, k^2) < 0 (stationary instability band).

    Present iff beta2 > 0 and Lambda = beta2^2 - 4 beta3 D d* > 0; the
    midpoint sign of b is verified before returning.
    """
    if D <= 0 or d_star <= 0:
        raise ValueError("D and d* must be positive")
    if beta.beta2 <= 0.0:
        return None
    lam = beta.beta2**2 - 4.0 * beta.beta3 * D * d_star
    if lam <= 0.0:
        return None
    root = math.sqrt(lam)
    lo = (beta.beta2 - root) / (2.0 * D * d_star)
    hi = (beta.beta2 + root) / (2.0 * D * d_star)
    mid = 0.5 * (lo + hi)
    if not beta.b(D, d_star, mid) < 0.0:
        raise RuntimeError("band endpoints inconsistent with the sign of b")
    return (lo, hi)


def steady_band_threshold(beta: BetaCoefficients, d_star: float) -> float | None:
    """Diffusivity at which the stationary band closes (Lambda = 0), found
    by bisection on Lambda(D); None when beta2 <= 0 (no band for any D)."""
    if beta.beta2 <= 0.0:
        return None
    lam = lambda D: beta.beta2**2 - 4.0 * beta.beta3 * D * d_star
    lo, hi = 0.0, 1.0
    while lam(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("Lambda fails to change sign")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if lam(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def hopf_band(
    beta: BetaCoefficients, D: float, d_star: float
) -> tuple[float, float] | None:
    """k^2 interval where the discriminant of the characteristic polynomial
    is negative (complex eigenvalue pair).

    Computed from the roots of the quadratic (in k^2)

        (D - d*)^2 x^2 - 2[(D + d*) beta1 - 2 beta2] x + beta1^2 - 4 beta3,

    clipped to x >= 0; the degenerate case D = d* reduces to a linear
    equation and may yield an interval unbounded above.
    """
    if D <= 0 or d_star <= 0:
        raise ValueError("D and d* must be positive")
    c1 = (D + d_star) * beta.beta1 - 2.0 * beta.beta2
    c0 = beta.beta1**2 - 4.0 * beta.beta3
    A = (D - d_star) ** 2
    if A == 0.0:
        # delta(x) = -2 c1 x + c0
        if c1 > 0.0:
            band = (max(0.0, c0 / (2.0 * c1)), math.inf)
        elif c1 < 0.0:
            band = (0.0, c0 / (2.0 * c1)) if c0 < 0.0 else None
        else:
            band = (0.0, math.inf) if c0 < 0.0 else None
    else:
        disc = c1 * c1 - A * c0
        if disc <= 0.0:
            return None
        root = math.sqrt(disc)
        lo, hi = (c1 - root) / A, (c1 + root) / A
        band = (max(0.0, lo), hi) if hi > 0.0 else None
    if band is None:
        return None
    lo, hi = band
    inside = 0.5 * (lo + hi) if math.isfinite(hi) else lo + 1.0
    if not beta.discriminant(D, d_star, inside) < 0.0:
        raise RuntimeError("band endpoints inconsistent with the discriminant sign")
    return band


@dataclass(frozen=True)
class Mode:
    """Classification of one Neumann mode k = n*pi/ell on [0, ell]."""

    n: int
    k: float
    klass: StabilityClass
    point: DispersionPoint


def _instability_cutoff(sys: LinearizedSystem) -> float:
    """Upper bound (in k^2) past which every mode is provably stable.

    Instability requires a < 0 or b < 0; a < 0 only below
    (B1+B4)/(d*+D) and b < 0 only between the roots of the k^2-quadratic.
    """
    d, D = sys.d_star, sys.D
    B1, B2 = float(sys.B[0, 0]), float(sys.B[0, 1])
    B3, B4 = float(sys.B[1, 0]), float(sys.B[1, 1])
    cut = 0.0
    tr = B1 + B4
    if tr > 0.0:
        cut = max(cut, tr / (d + D))
    c1 = d * B4 + sys.taxis * B3 + B1 * D
    c0 = B1 * B4 - B2 * B3
    disc = c1 * c1 - 4.0 * d * D * c0
    if disc >= 0.0:
        upper = (c1 + math.sqrt(disc)) / (2.0 * d * D)
        cut = max(cut, upper)
    return cut


def unstable_modes(
    kin: KineticsModel,
    mot: MotilityModel,
    D: float,
    eq: Equilibrium,
    ell: float,
    n_max: int | None = None,
) -> list[Mode]:
    """Non-stable Neumann modes on an interval of length ell.

    Modes n = 0..n_max are classified through the dispersion relation;
    by default n_max reaches two modes past every instability band.
    """
    if ell <= 0:
        raise ValueError("interval length must be positive")
    sys = linearize(kin, mot, D, eq)
    if n_max is None:
        cut = _instability_cutoff(sys)
        n_past = math.floor(ell * math.sqrt(cut) / math.pi) + 1
        n_max = n_past + 2
    out = []
    for n in range(n_max + 1):
        k = n * math.pi / ell
        pt = dispersion(sys, k)
        if pt.klass is not StabilityClass.STABLE:
            out.append(Mode(n, k, pt.klass, pt))
    return out


@dataclass(frozen=True)
class MinStabilizingD:
    """Supremum of the bifurcation curves over the interval's spectrum.

    Every D > D_min renders all modes n >= 1 linearly stable.  When the
    homogeneous mode n = 0 is unstable independently of D (beta1 > 0),
    no finite diffusivity stabilizes the state and D_min is None.
    """

    D_min: float | None
    homogeneous_mode_unstable: bool


def min_stabilizing_D(
    kin: KineticsModel, mot: MotilityModel, eq: Equilibrium, ell: float
) -> MinStabilizingD:
    """Threshold diffusivity for linear stability of all interval modes.

    The supremum over eta in {(n pi/ell)^2 : n >= 1} of max(D_H, D_S) is
    computed by evaluating every mode up to the curves' last interior
    feature and closing the tail with the analytic limits (D_H -> -d*,
    D_S -> 0 from below when beta2 <= 0).
    """
    if ell <= 0:
        raise ValueError("interval length must be positive")
    beta = beta_coefficients(kin, mot, eq)
    if beta.beta1 > 0.0:
        return MinStabilizingD(None, True)
    d = float(mot.d(eq.v))
    eta1 = (math.pi / ell) ** 2

    # Features beyond which both curves are monotone toward their limits.
    eta_stop = eta1
    if beta.beta2 > 0.0:
        eta_stop = max(eta_stop, 4.0 * beta.beta3 / beta.beta2)
    n_stop = max(16, math.ceil(ell * math.sqrt(eta_stop) / math.pi) + 2)
    n = np.arange(1, n_stop + 1)
    eta = (n * math.pi / ell) ** 2
    D_H = beta.beta1 / eta - d
    D_S = beta.beta2 / (d * eta) - beta.beta3 / (d * eta * eta)
    best = float(np.max(np.maximum(D_H, D_S)))

    # Tail suprema of the discrete sets (approached, not attained).
    tail = -d if beta.beta1 <= 0.0 else math.inf
    if beta.beta2 <= 0.0:
        tail = max(tail, 0.0)
    return MinStabilizingD(max(best, tail), False)
