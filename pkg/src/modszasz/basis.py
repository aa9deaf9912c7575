"""Szász basis functions s_{b,k}(x) = exp(-bx) (bx)^k / k! and their truncation.

Everything is evaluated in log space so that k in the thousands (and
Poisson parameters well beyond the double-precision range of k!) stay finite.
The log uses Loader's saddle-point split into a Stirling remainder and a
deviance term, which avoids the cancellation of ``-lam + k log lam - lgamma``
when lam is large.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, TruncationError

DEFAULT_TERM_CAP = 1_000_000
TAIL_SAFETY = 0.5


@dataclass(frozen=True)
class BasisContext:
    """A fixed (b, x) pair with the Poisson parameter ``lam = b * x`` cached."""

    b: float
    x: float
    lam: float = field(init=False)
    log_lam: float = field(init=False)

    def __post_init__(self):
        b = float(self.b)
        x = float(self.x)
        if not (math.isfinite(b) and b >= 1.0):
            raise DomainError(f"sequence value must satisfy b >= 1, got {self.b!r}")
        if not (math.isfinite(x) and x >= 0.0):
            raise DomainError(f"evaluation point must satisfy x >= 0, got {self.x!r}")
        lam = b * x
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "log_lam", math.log(lam) if lam > 0 else -math.inf)


def _as_indices(k):
    k_arr = np.asarray(k)
    if k_arr.dtype.kind not in "iu":
        if not np.all(np.equal(np.mod(k_arr, 1), 0)):
            raise DomainError("basis index k must be an integer")
        k_arr = k_arr.astype(np.int64)
    if np.any(k_arr < 0):
        raise DomainError("basis index k must be nonnegative")
    return k_arr


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _stirling_remainder(k):
    """log k! - [(k + 1/2) log k - k + log sqrt(2 pi)] for k >= 1."""
    k = np.asarray(k, dtype=float)
    out = np.empty_like(k)
    small = k <= 15
    ks = k[small]
    out[small] = gammaln(ks + 1.0) - (ks + 0.5) * np.log(ks) + ks - _HALF_LOG_2PI
    kl = k[~small]
    inv2 = 1.0 / (kl * kl)
    out[~small] = (1 / 12 - (1 / 360 - (1 / 1260 - (1 / 1680 - inv2 / 1188) * inv2) * inv2) * inv2) / kl
    return out


_SERIES_TERMS = 12  # |v| < 0.1, so v^24 is far below double precision


def _deviance(k, lam):
    """k log(k/lam) + lam - k for broadcastable k >= 1 and lam > 0.

    Near k = lam the direct form cancels; there the series
    (k - lam) v + 2k sum_j v^(2j+1)/(2j+1), v = (k - lam)/(k + lam), is used
    with a fixed number of terms so each entry is computed the same way
    regardless of array shape.
    """
    k, lam = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(lam, dtype=float))
    out = k * (np.log(k) - np.log(lam)) + lam - k
    near = np.abs(k - lam) < 0.1 * (k + lam)
    if np.any(near):
        kn, ln = k[near], lam[near]
        v = (kn - ln) / (kn + ln)
        total = (kn - ln) * v
        ej = 2.0 * kn * v
        v2 = v * v
        for j in range(1, _SERIES_TERMS + 1):
            ej = ej * v2
            total = total + ej / (2 * j + 1)
        out[near] = total
    return out


def log_poisson_matrix(lam, k):
    """log of e^{-lam} lam^k / k! for every pair (lam[i], k[j]); shape (len(lam), len(k)).

    ``lam`` holds nonnegative Poisson parameters and ``k`` nonnegative integers.
    """
    lam = np.asarray(lam, dtype=float).reshape(-1, 1)
    k = np.asarray(k).reshape(1, -1)
    out = np.empty((lam.shape[0], k.shape[1]))
    pos_lam = lam[:, 0] > 0.0
    pos_k = k[0] > 0
    out[~pos_lam, :] = np.where(pos_k, -np.inf, 0.0)
    if np.any(pos_lam):
        lp = lam[pos_lam]
        out[np.ix_(pos_lam, ~pos_k)] = -lp
        kp = k[:, pos_k].astype(float)
        head = -_stirling_remainder(kp[0]) - _HALF_LOG_2PI - 0.5 * np.log(kp[0])
        out[np.ix_(pos_lam, pos_k)] = head - _deviance(kp, lp)
    return out


def log_basis_value(ctx, k):
    """Natural log of s_{b,k}(x); ``-inf`` where the basis value is exactly 0."""
    k_arr = _as_indices(k)
    out = log_poisson_matrix([ctx.lam], np.atleast_1d(k_arr))[0].reshape(np.shape(k_arr))
    return float(out) if np.ndim(out) == 0 else out


def basis_value(ctx, k):
    """Evaluate s_{b,k}(x) for a scalar or an array of indices ``k``.

    At ``x == 0`` the values are exact: 1 for k = 0 and 0 otherwise.
    """
    k_arr = _as_indices(k)
    if ctx.lam == 0.0:
        out = (k_arr == 0).astype(float)
    else:
        out = np.minimum(np.exp(log_basis_value(ctx, k_arr)), 1.0)
    return float(out) if np.ndim(out) == 0 else out


def basis_derivative(ctx, k):
    """First derivative of s_{b,k} with respect to x.

    Uses (x/b) s'_{b,k}(x) = (k/b - x) s_{b,k}(x) for x > 0 and the one-sided
    analytic limit at x = 0 (-b for k = 0, b for k = 1, 0 otherwise).
    """
    k_arr = _as_indices(k)
    if ctx.x == 0.0:
        out = np.select([k_arr == 0, k_arr == 1], [-ctx.b, ctx.b], 0.0)
    else:
        s = basis_value(ctx, k_arr)
        out = (ctx.b / ctx.x) * (k_arr / ctx.b - ctx.x) * s
    return float(out) if np.ndim(out) == 0 else out


def poisson_tail_bound(ctx, K):
    """Upper bound on sum_{k > K} s_{b,k}(x).

    Consecutive terms shrink by lam/(k+1), so past ``K + 2 > lam`` the tail is
    dominated by a geometric series starting at s_{b,K+1}. Returns ``inf``
    when the ratio bound is not yet below one.
    """
    if ctx.lam == 0.0:
        return 0.0
    rho = ctx.lam / (K + 2.0)
    if rho >= 1.0:
        return math.inf
    log_term = -ctx.lam + (K + 1) * ctx.log_lam - math.lgamma(K + 2.0)
    return math.exp(log_term) / (1.0 - rho)


def smallest_index(accept, start, cap):
    """Smallest K in [start, cap] with ``accept(K)`` true, for monotone ``accept``.

    Gallops upward from ``start`` then bisects. Returns None if ``accept(cap)``
    is false.
    """
    if start > cap:
        return None
    if accept(start):
        return start
    lo, step = start, 1
    while True:
        hi = start + step
        if hi >= cap:
            hi = cap
            if not accept(hi):
                return None
            break
        if accept(hi):
            break
        lo = hi
        step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if accept(mid):
            hi = mid
        else:
            lo = mid
    return hi


def tail_cutoff(ctx, tol, cap=DEFAULT_TERM_CAP):
    """Smallest K >= ceil(lam) whose Poisson tail past K is certified below ``tol``.

    The certificate is the geometric ratio bound of :func:`poisson_tail_bound`
    scaled by a safety factor of 1/2.

    Raises
    ------
    TruncationError
        If no K <= ``cap`` meets the tolerance.
    """
    if not tol > 0:
        raise DomainError("tail tolerance must be positive")
    if ctx.lam == 0.0:
        return 0
    start = math.ceil(ctx.lam)
    K = smallest_index(lambda k: poisson_tail_bound(ctx, k) < TAIL_SAFETY * tol, start, cap)
    if K is None:
        bound = poisson_tail_bound(ctx, max(cap, start))
        raise TruncationError(
            f"tail bound {bound:.3e} still above tol={tol:.1e} at the cap K={cap}",
            bound=bound,
            index=cap,
        )
    return K
