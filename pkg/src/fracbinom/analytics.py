"""Closed-form quantities of the fractional binomial process.

Every formula here reduces to a finite combination of Mittag-Leffler
relaxation values E_{order,1}(-k (birth+death) t**order), k = 0..N.  The
combination weights are alternating binomial sums that cancel
catastrophically in plain float64 once N grows past ~40, so they are built
once per parameter set in double-double arithmetic from the product form of
the generating function and contracted against the relaxation vector in
compensated arithmetic.  The relaxation vector is evaluated once per call
(N+1 Mittag-Leffler evaluations, not O(N^4)).

State probabilities are exact for the classical chain (order=1) and for
fractional order are the one-dimensional time-changed marginals.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from . import _dd
from .mittag_leffler import ml, ml_one
from .model import ProcessParams, Regime, classify, equilibrium_p

__all__ = [
    "AccuracyError",
    "Pmf",
    "mean",
    "second_factorial_moment",
    "variance",
    "extinction_probability",
    "pmf",
    "pure_birth_pmf",
    "classical_pgf",
    "pgf",
    "equilibrium_pmf",
    "waiting_time_density",
]

# Tolerated roundoff on probability vectors; anything worse is treated as a
# formula/accuracy failure rather than silently clamped.
EPS_NUM = 1e-9

MAX_CEILING = 150
WARN_CEILING = 60


class AccuracyError(ArithmeticError):
    """A probability vector failed its internal normalization check."""


@dataclass(frozen=True)
class Pmf:
    """Distribution of the population at a fixed time.

    probs[n] = P(population == n), n = 0..ceiling.  Roundoff-level negative
    entries are clamped and the vector renormalized; both corrections are
    bounded by EPS_NUM or construction fails.
    """

    t: float
    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        self.probs.setflags(write=False)

    def __len__(self) -> int:
        return len(self.probs)


def _finalize_pmf(t, raw, context):
    raw = np.asarray(raw, dtype=float)
    worst = raw.min()
    if worst < -EPS_NUM:
        raise AccuracyError(
            f"{context}: probability entry {worst:.3e} below -{EPS_NUM}; "
            "cancellation exceeded the supported accuracy"
        )
    clamped = int((raw < 0.0).sum())
    if clamped:
        warnings.warn(
            f"{context}: clamped {clamped} entries in [-{EPS_NUM}, 0) to zero",
            RuntimeWarning,
            stacklevel=3,
        )
    out = np.where(raw < 0.0, 0.0, raw)
    total = out.sum()
    if abs(total - 1.0) > EPS_NUM:
        raise AccuracyError(
            f"{context}: probabilities sum to {total!r}, off by {total-1.0:.3e} (> {EPS_NUM})"
        )
    return Pmf(t=float(t), probs=out / total)


# ---------------------------------------------------------------------------
# relaxation-weight tables
#
# The classical generating function is a product of N linear factors in the
# variable e = exp(-(birth+death) t); expanding it in (state, e-power) gives
# integer-combination weights W[n, s] with p_n(t) = sum_s W[n, s] e^s.  The
# fractional process replaces e^s by E_{order,1}(-s (birth+death) t**order).
# ---------------------------------------------------------------------------


def _slot_probabilities(birth_rate, death_rate):
    total = _dd.two_sum(birth_rate, death_rate)
    p = _dd.dd_div(_dd.dd(birth_rate), total)
    q = _dd.dd_div(_dd.dd(death_rate), total)
    return p, q


def _shift_accumulate(acc, block, shift_n, shift_s, coeff):
    # acc += coeff * block shifted by (shift_n, shift_s); all dd arrays
    bh, bl = _dd.dd_mul(block, coeff)
    ah, al = acc
    rows, cols = bh.shape
    dst = (slice(shift_n, None), slice(shift_s, None))
    src = (slice(0, rows - shift_n), slice(0, cols - shift_s))
    rh, rl = _dd.dd_add((ah[dst], al[dst]), (bh[src], bl[src]))
    ah[dst] = rh
    al[dst] = rl


@functools.lru_cache(maxsize=16)
def _relaxation_weights(birth_rate, death_rate, ceiling, initial):
    """Weight matrix W with p_n = sum_s W[n, s] * relaxation(s), as dd arrays."""
    n_states = ceiling + 1
    p, q = _slot_probabilities(birth_rate, death_rate)
    neg_p = _dd.dd_neg(p)
    neg_q = _dd.dd_neg(q)
    work = _dd.dd_zeros((n_states, n_states))
    work[0][0, 0] = 1.0
    # (ceiling - initial) vacancy factors: (q + p e) + (p - p e) v
    for _ in range(ceiling - initial):
        acc = _dd.dd_zeros((n_states, n_states))
        _shift_accumulate(acc, work, 0, 0, q)
        _shift_accumulate(acc, work, 0, 1, p)
        _shift_accumulate(acc, work, 1, 0, p)
        _shift_accumulate(acc, work, 1, 1, neg_p)
        work = acc
    # initial occupied factors: (q - q e) + (p + q e) v
    for _ in range(initial):
        acc = _dd.dd_zeros((n_states, n_states))
        _shift_accumulate(acc, work, 0, 0, q)
        _shift_accumulate(acc, work, 0, 1, neg_q)
        _shift_accumulate(acc, work, 1, 0, p)
        _shift_accumulate(acc, work, 1, 1, q)
        work = acc
    work[0].setflags(write=False)
    work[1].setflags(write=False)
    return work


@functools.lru_cache(maxsize=16)
def _extinction_weights(birth_rate, death_rate, ceiling, initial):
    """1-D weights of the extinction probability over the relaxation index."""
    n_coeff = ceiling + 1
    p, q = _slot_probabilities(birth_rate, death_rate)
    neg_q = _dd.dd_neg(q)
    wh = np.zeros(n_coeff)
    wl = np.zeros(n_coeff)
    wh[0] = 1.0
    for _ in range(ceiling - initial):
        # multiply by (q + p e)
        th, tl = _dd.dd_mul((wh, wl), p)
        wh, wl = _dd.dd_mul((wh, wl), q)
        rh, rl = _dd.dd_add((wh[1:], wl[1:]), (th[:-1], tl[:-1]))
        wh[1:], wl[1:] = rh, rl
    for _ in range(initial):
        # multiply by (q - q e)
        th, tl = _dd.dd_mul((wh, wl), neg_q)
        wh, wl = _dd.dd_mul((wh, wl), q)
        rh, rl = _dd.dd_add((wh[1:], wl[1:]), (th[:-1], tl[:-1]))
        wh[1:], wl[1:] = rh, rl
    wh.setflags(write=False)
    wl.setflags(write=False)
    return wh, wl


def _relaxation_vector(order, rate_scale, t, count):
    """[E_{order,1}(-k * rate_scale * t**order) for k in 0..count-1]."""
    tp = float(t) ** order
    return np.array([ml_one(order, -k * rate_scale * tp) for k in range(count)])


def _check_time(t):
    t = float(t)
    if not (t >= 0.0 and math.isfinite(t)):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    return t


def _initial_delta(params):
    probs = np.zeros(params.ceiling + 1)
    probs[params.initial] = 1.0
    return probs


# ---------------------------------------------------------------------------
# moments
# ---------------------------------------------------------------------------


def mean(params: ProcessParams, t: float) -> float:
    """Expected population at time t."""
    t = _check_time(t)
    m0 = params.initial
    if t == 0.0:
        return float(m0)
    target = params.ceiling * equilibrium_p(params)
    e1 = ml_one(params.order, -params.total_rate * t**params.order)
    return (m0 - target) * e1 + target


def second_factorial_moment(params: ProcessParams, t: float) -> float:
    """E[X(t) (X(t) - 1)]."""
    t = _check_time(t)
    lam, mu = params.birth_rate, params.death_rate
    n_cap, m0 = params.ceiling, params.initial
    if t == 0.0:
        return float(m0 * (m0 - 1))
    total = lam + mu
    tp = t**params.order
    e1 = ml_one(params.order, -total * tp)
    e2 = ml_one(params.order, -2.0 * total * tp)
    h_inf = lam * lam * n_cap * (n_cap - 1) / total**2
    cross = 2.0 * lam * m0 * (n_cap - 1) / total
    return h_inf + e2 * (h_inf - cross + m0 * (m0 - 1)) - e1 * (2.0 * h_inf - cross)


def variance(params: ProcessParams, t: float) -> float:
    """Population variance at time t; 0 at t=0, N p (1-p) in the long run."""
    t = _check_time(t)
    if t == 0.0:
        return 0.0
    m = mean(params, t)
    return second_factorial_moment(params, t) + m - m * m


# ---------------------------------------------------------------------------
# distributions
# ---------------------------------------------------------------------------


def extinction_probability(params: ProcessParams, t: float) -> float:
    """P(population == 0 at time t); exactly 0 for the pure-birth regime."""
    t = _check_time(t)
    if classify(params) is Regime.PURE_BIRTH:
        return 0.0
    if t == 0.0:
        return 0.0
    wh, wl = _extinction_weights(
        params.birth_rate, params.death_rate, params.ceiling, params.initial
    )
    es = _relaxation_vector(params.order, params.total_rate, t, len(wh))
    hi, lo = _dd.dd_dot_float(wh[None, :], wl[None, :], es)
    value = float(hi[0] + lo[0])
    return min(1.0, max(0.0, value))


def pmf(params: ProcessParams, t: float) -> Pmf:
    """Distribution of the population at time t over states 0..ceiling.

    The pure-birth regime dispatches to pure_birth_pmf.  Above ceiling=60
    alternating-sum cancellation is the known hazard and a normalization
    check raises AccuracyError rather than returning degraded values; the
    supported range is capped at ceiling=150.
    """
    t = _check_time(t)
    if classify(params) is Regime.PURE_BIRTH:
        return pure_birth_pmf(params, t)
    if t == 0.0:
        return Pmf(t=0.0, probs=_initial_delta(params))
    if params.ceiling > MAX_CEILING:
        raise ValueError(f"pmf supports ceiling <= {MAX_CEILING}, got {params.ceiling}")
    if params.ceiling > WARN_CEILING:
        warnings.warn(
            f"pmf accuracy degrades for ceiling > {WARN_CEILING} "
            "(alternating-sum cancellation); the normalization check below "
            "guards against silent loss",
            RuntimeWarning,
            stacklevel=2,
        )
    wh, wl = _relaxation_weights(
        params.birth_rate, params.death_rate, params.ceiling, params.initial
    )
    es = _relaxation_vector(params.order, params.total_rate, t, wh.shape[1])
    hi, lo = _dd.dd_dot_float(wh, wl, es)
    return _finalize_pmf(t, hi + lo, f"pmf(t={t})")


def pure_birth_pmf(params: ProcessParams, t: float) -> Pmf:
    """Distribution for the saturating pure-birth regime (death_rate == 0).

    Support is {initial..ceiling}; the ceiling state is absorbing.
    """
    if classify(params) is not Regime.PURE_BIRTH:
        raise ValueError("pure_birth_pmf requires death_rate == 0")
    t = _check_time(t)
    if t == 0.0:
        return Pmf(t=0.0, probs=_initial_delta(params))
    n_cap, m0 = params.ceiling, params.initial
    tp = t**params.order
    es = np.array(
        [ml_one(params.order, -params.birth_rate * (n_cap - m) * tp) for m in range(m0, n_cap + 1)]
    )
    n_states = n_cap + 1
    wh = np.zeros((n_states, n_cap - m0 + 1))
    wl = np.zeros_like(wh)
    for n in range(m0, n_cap + 1):
        lead = math.comb(n_cap - m0, n_cap - n)
        for m in range(m0, n + 1):
            w = lead * math.comb(n - m0, m - m0)
            if (n - m) & 1:
                w = -w
            wh[n, m - m0], wl[n, m - m0] = _dd.dd_from_int(w)
    hi, lo = _dd.dd_dot_float(wh, wl, es)
    return _finalize_pmf(t, hi + lo, f"pure_birth_pmf(t={t})")


def equilibrium_pmf(params: ProcessParams) -> Pmf:
    """Long-run binomial distribution over 0..ceiling."""
    n_cap = params.ceiling
    p = equilibrium_p(params)
    probs = np.zeros(n_cap + 1)
    if p == 0.0:
        probs[0] = 1.0
    elif p == 1.0:
        probs[n_cap] = 1.0
    else:
        n = np.arange(n_cap + 1)
        log_c = gammaln(n_cap + 1) - gammaln(n + 1) - gammaln(n_cap - n + 1)
        probs = np.exp(log_c + n * math.log(p) + (n_cap - n) * math.log1p(-p))
    return Pmf(t=math.inf, probs=probs / probs.sum())


# ---------------------------------------------------------------------------
# generating functions and waiting times
# ---------------------------------------------------------------------------


def _check_u(u):
    u = float(u)
    if not (0.0 <= u <= 2.0):
        raise ValueError(f"u must satisfy |1-u| <= 1 (u in [0, 2]), got {u}")
    return u


def classical_pgf(params: ProcessParams, u: float, t: float) -> float:
    """Transform sum_n (1-u)^n p_n(t) of the classical (order=1) chain."""
    u = _check_u(u)
    t = _check_time(t)
    p = equilibrium_p(params)
    decay = math.exp(-params.total_rate * t)
    grown = (1.0 - decay) * p
    vacancy = 1.0 - grown * u
    occupied = 1.0 - (grown + decay) * u
    return vacancy ** (params.ceiling - params.initial) * occupied**params.initial


def pgf(params: ProcessParams, u: float, t: float) -> float:
    """Transform sum_n (1-u)^n p_n(t) of the fractional process."""
    u = _check_u(u)
    dist = pmf(params, t)
    base = 1.0 - u
    return float(np.polynomial.polynomial.polyval(base, dist.probs))


def waiting_time_density(params: ProcessParams, j: int, s: float) -> float:
    """Density of the sojourn in state j of the pure-birth regime.

    Diverges like s**(order-1) at s=0 when order < 1; evaluated pointwise.
    """
    if classify(params) is not Regime.PURE_BIRTH:
        raise ValueError("waiting_time_density requires the pure-birth regime")
    if not (params.initial <= j < params.ceiling):
        raise ValueError(
            f"state j must satisfy initial <= j < ceiling, got j={j}"
        )
    s = float(s)
    if s < 0.0:
        raise ValueError(f"s must be >= 0, got {s}")
    rate = params.state_birth_rate(j)
    nu = params.order
    if s == 0.0:
        return rate if nu == 1.0 else math.inf
    return rate * s ** (nu - 1.0) * ml(nu, nu, -rate * s**nu)
