"""Independent reference implementations used only for validation.

Nothing in this module may import the mittag_leffler or analytics modules:
agreement between the main formulas and these reference routes is the
package's primary correctness evidence, so the two sides have to stay
algorithmically disjoint.  The classical master equation is integrated
numerically (adaptive Dormand-Prince, cross-checkable against a
scaling-and-squaring matrix exponential), the Mittag-Leffler series is
summed in software extended precision, and the fractional state
probabilities are estimated by direct Monte Carlo over the random time
change, never through the closed-form Mittag-Leffler expressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eig, eigh, expm
from scipy.special import gammaln

from .model import ProcessParams, Regime, classify
from .sampler import RngSeed, stable_subordinator_unit

__all__ = [
    "OdeSolution",
    "McPmf",
    "generator_matrix",
    "master_equation_classical",
    "classical_pmf_batch",
    "ml_series_highprec",
    "subordination_pmf_mc",
]

_CONSERVATION_TOL = 1e-10
_NEGATIVE_TOL = 1e-12

# Beyond this working precision the plain series is wasteful; the
# high-precision contour integral takes over.  The cap keeps the series in
# charge everywhere the main path uses its own contour (|z|**(1/alpha) < 36
# needs < ~100 dps), so the two sides never share an algorithm: series-zone
# and contour-zone values are checked against the extended series, and
# asymptotic-zone values against the extended contour.
_SERIES_DPS_CAP = 150


@dataclass(frozen=True)
class OdeSolution:
    """Classical state probabilities at one time, from numerical integration."""

    t: float
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if abs(probs.sum() - 1.0) > _CONSERVATION_TOL:
            raise ArithmeticError(
                f"probability not conserved: sum={probs.sum()!r} at t={self.t}"
            )
        if probs.min() < -_NEGATIVE_TOL:
            raise ArithmeticError(
                f"negative probability {probs.min():.3e} at t={self.t}"
            )
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


@dataclass(frozen=True)
class McPmf:
    """Monte Carlo estimate of the fractional state probabilities."""

    t: float
    probs: np.ndarray
    se: np.ndarray
    n_samples: int


def generator_matrix(params: ProcessParams) -> np.ndarray:
    """Dense generator A with dp/dt = A p for the classical chain."""
    n_cap = params.ceiling
    lam, mu = params.birth_rate, params.death_rate
    a = np.zeros((n_cap + 1, n_cap + 1))
    for n in range(n_cap + 1):
        a[n, n] = -(mu * n + lam * (n_cap - n))
        if n + 1 <= n_cap:
            a[n, n + 1] = mu * (n + 1)
        if n - 1 >= 0:
            a[n, n - 1] = lam * (n_cap - n + 1)
    return a


def _initial_vector(params: ProcessParams) -> np.ndarray:
    p0 = np.zeros(params.ceiling + 1)
    p0[params.initial] = 1.0
    return p0


def master_equation_classical(params: ProcessParams, t, method="auto") -> OdeSolution:
    """Solve the classical master equation from the deterministic start.

    method: "dop853" adaptive Runge-Kutta, "expm" scaling-and-squaring matrix
    exponential (ceiling <= 64), or "auto" to pick expm where available.
    The two routes cross-check each other in the test suite.
    """
    t = float(t)
    if t < 0.0 or not math.isfinite(t):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    if method == "auto":
        method = "expm" if params.ceiling <= 64 else "dop853"
    if t == 0.0:
        return OdeSolution(t=0.0, probs=_initial_vector(params))
    a = generator_matrix(params)
    p0 = _initial_vector(params)
    if method == "expm":
        probs = expm(a * t) @ p0
    elif method == "dop853":
        result = solve_ivp(
            lambda _, p: a @ p,
            (0.0, t),
            p0,
            method="DOP853",
            rtol=1e-12,
            atol=1e-14,
        )
        if not result.success:
            raise ArithmeticError(f"ODE integration failed: {result.message}")
        probs = result.y[:, -1]
    else:
        raise ValueError(f"unknown method {method!r}")
    return OdeSolution(t=t, probs=probs)


def _spectral_factors(params: ProcessParams):
    """Eigen-factorization of the generator, via the reversible symmetrization
    when both rates are positive (orthogonal, numerically stable)."""
    a = generator_matrix(params)
    n_cap = params.ceiling
    if classify(params) is Regime.GENERAL:
        p = params.birth_rate / params.total_rate
        n = np.arange(n_cap + 1)
        log_pi = (
            gammaln(n_cap + 1)
            - gammaln(n + 1)
            - gammaln(n_cap - n + 1)
            + n * math.log(p)
            + (n_cap - n) * math.log1p(-p)
        )
        d = np.exp(0.5 * log_pi)
        sym = a * (d[None, :] / d[:, None])
        eigvals, q = eigh(sym)
        left = q.T @ (_initial_vector(params) / d)
        right = d[:, None] * q
        return eigvals, right, left
    eigvals, vecs = eig(a)
    eigvals = eigvals.real
    coeff = np.linalg.solve(vecs, _initial_vector(params))
    return eigvals, vecs.real, coeff.real


def classical_pmf_batch(params: ProcessParams, ts) -> np.ndarray:
    """Classical probabilities at many times via one eigen-factorization.

    Returns an array of shape (len(ts), ceiling+1).  Intended for the Monte
    Carlo subordination oracle where the master equation must be read at
    10^5 random operational times.
    """
    ts = np.asarray(ts, dtype=float)
    eigvals, right, left = _spectral_factors(params)
    decay = np.exp(np.outer(eigvals, ts))
    probs = (right @ (decay * left[:, None])).T
    bad = np.abs(probs.sum(axis=1) - 1.0).max()
    if bad > 1e-8:
        raise ArithmeticError(f"spectral route lost conservation by {bad:.3e}")
    return probs


def ml_series_highprec(alpha, beta, z, digits: int = 30, return_bound: bool = False):
    """Mittag-Leffler value from the defining series in extended precision.

    The working precision adapts to the cancellation of the alternating
    series (the largest term is ~exp(|z|**(1/alpha))).  Where that would
    exceed the feasible cap the value comes from an extended-precision
    contour integral instead, which in that regime is still independent of
    the main evaluation path.  Returns the value, optionally with an
    interval-style bound on the truncation error.
    """
    alpha = float(alpha)
    beta = float(beta)
    z = float(z)
    digits = int(digits)
    if not (0.0 < alpha <= 1.0 and beta > 0.0 and z <= 0.0):
        raise ValueError(f"unsupported arguments alpha={alpha}, beta={beta}, z={z}")
    if not (1 <= digits <= 60):
        raise ValueError(f"digits must be in [1, 60], got {digits}")
    x = -z
    if x == 0.0:
        value = float(1.0 / mp.gamma(beta))
        return (value, 0.0) if return_bound else value
    log10_maxterm = x ** (1.0 / alpha) / math.log(10.0) if alpha < 1.0 else x / math.log(10.0)
    need = digits + int(log10_maxterm) + 15
    if need > _SERIES_DPS_CAP:
        value = _ml_contour_highprec(alpha, beta, x, digits)
        return (value, 10.0 ** (-digits)) if return_bound else value
    with mp.workdps(need):
        aa, bb, zz = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
        total = mp.mpf(0)
        tail = mp.mpf(10) ** (-(digits + 8))
        r = 0
        while True:
            term = zz**r / mp.gamma(aa * r + bb)
            total += term
            if r > 4 and abs(term) < tail:
                break
            r += 1
            if r > 500_000:
                raise ArithmeticError("series iteration cap exceeded")
        value = float(total)
        bound = float(abs(term) * 4)
    return (value, bound) if return_bound else value


def _ml_contour_highprec(alpha, beta, x, digits):
    # Bromwich integral over a left-opening parabola evaluated by a
    # trapezoidal rule in extended precision; node count and endpoint decay
    # scale with the requested digits.  The integrand satisfies
    # f(-w) = -conj(f(w)), so only w >= 0 is evaluated.
    dps = digits + 15
    with mp.workdps(dps):
        aa, bb, xx = mp.mpf(alpha), mp.mpf(beta), mp.mpf(x)
        mu = mp.mpf(12)
        tail = mp.log(mp.mpf(10)) * (digits + 8) + 8
        half_width = mp.sqrt(1 + tail / mu)
        nodes = int(7 * float(half_width) * math.sqrt(digits)) + 8
        h = half_width / nodes

        def f(w):
            s = mu * (1 + 1j * w) ** 2
            return mp.exp(s) * s ** (aa - bb) / (s**aa + xx) * (2j * mu * (1 + 1j * w))

        total = f(mp.mpf(0))
        for k in range(1, nodes + 1):
            fk = f(k * h)
            total += fk - mp.conj(fk)
        return float(mp.re(total * h / (2j * mp.pi)))


def subordination_pmf_mc(
    params: ProcessParams, t, n_samples: int, seed: RngSeed
) -> McPmf:
    """Monte Carlo estimate of the fractional state probabilities.

    Averages the classical probabilities at sampled operational times:
    p_n(t) ~ mean_k p_n(V_k) with V_k independent draws of the inverse
    subordinator.  The law of V is sampled, never evaluated pointwise.
    """
    t = float(t)
    n_samples = int(n_samples)
    if n_samples < 1000:
        raise ValueError(f"n_samples must be >= 1000, got {n_samples}")
    if t < 0.0:
        raise ValueError(f"t must be >= 0, got {t}")
    if params.order == 1.0 or t == 0.0:
        probs = master_equation_classical(params, t).probs
        zeros = np.zeros_like(probs)
        return McPmf(t=t, probs=probs, se=zeros, n_samples=n_samples)
    rng = np.random.default_rng(seed)
    s = stable_subordinator_unit(params.order, rng, size=n_samples)
    v = (t / s) ** params.order
    samples = classical_pmf_batch(params, v)
    probs = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(n_samples)
    return McPmf(t=t, probs=probs, se=se, n_samples=n_samples)
