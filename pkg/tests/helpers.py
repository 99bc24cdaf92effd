"""Shared test utilities: independent oracles kept deliberately separate
from the library code paths they check."""

import math

import numpy as np

from preytaxis_lab.solver import (
    Grid1D,
    Perturbation,
    SolverConfig,
    integrate,
)


def bisect_coexistence_oracle(kin, tol=1e-13):
    """Positive steady state by plain bisection of the defining equations,
    written independently of the library's root-finding."""

    def g(v):
        return kin.gamma * float(kin.F(v)) - kin.theta - kin.alpha * float(
            kin.f(v)
        ) / float(kin.F(v))

    lo, hi = 1e-9 * kin.K, kin.K * (1.0 - 1e-12)
    assert g(lo) < 0 < g(hi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    v = 0.5 * (lo + hi)
    return float(kin.f(v)) / float(kin.F(v)), v


def sign_change_intervals(fn, xs):
    """Intervals [xs[i], xs[i+1]] where fn changes sign (scan oracle)."""
    vals = np.asarray([fn(x) for x in xs])
    out = []
    for i in range(len(xs) - 1):
        if vals[i] == 0.0 or vals[i] * vals[i + 1] < 0.0:
            out.append((xs[i], xs[i + 1]))
    return out


def fd_jacobian(fn, x, step=1e-6):
    """Central-difference Jacobian of a vector map R^n -> R^m."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fn(x))
    J = np.zeros((f0.size, x.size))
    for j in range(x.size):
        xp, xm = x.copy(), x.copy()
        xp[j] += step
        xm[j] -= step
        J[:, j] = (np.asarray(fn(xp)) - np.asarray(fn(xm))) / (2.0 * step)
    return J


def modal_growth_rate(kin, mot, D, eq, ell, n_cells, n_mode, delta=1e-6, horizon=20.0, n_out=41):
    """Measured exponential growth rate of a single Neumann mode.

    Seeds the mode with the real part of the dominant eigenvector of the
    linearization, projects the evolving fields back onto the mode's
    cosine profile, expresses the projection in the eigenbasis and fits
    the log modal amplitude against time.
    """
    from preytaxis_lab.linstab import linearize

    sys = linearize(kin, mot, D, eq)
    k = n_mode * math.pi / ell
    M = sys.M(k)
    eigvals, eigvecs = np.linalg.eig(M)
    i = int(np.argmax(eigvals.real))
    w = eigvecs[:, i]
    w = w / np.linalg.norm(w)

    grid = Grid1D(ell, n_cells)
    x = grid.centers()
    profile = np.cos(k * x)
    u0 = eq.u + delta * w[0].real * profile
    v0 = eq.v + delta * w[1].real * profile
    cfg = SolverConfig(
        kin=kin,
        mot=mot,
        D=D,
        grid=grid,
        t_end=horizon,
        base_state=(u0, v0),
        perturbation=Perturbation(0.0, 0),
        snapshot_count=n_out,
        series_count=n_out,
    )
    traj = integrate(cfg)

    Vinv = np.linalg.inv(eigvecs)
    norm = np.sum(profile * profile)
    ts, amps = [], []
    for st in traj.snapshots:
        p = np.array(
            [
                np.sum((st.u - eq.u) * profile) / norm,
                np.sum((st.v - eq.v) * profile) / norm,
            ]
        )
        c = Vinv @ p
        amps.append(abs(c[i]))
        ts.append(st.t)
    ts, amps = np.asarray(ts), np.asarray(amps)
    keep = amps > 0
    slope = np.polyfit(ts[keep], np.log(amps[keep]), 1)[0]
    return float(slope), eigvals[i]
