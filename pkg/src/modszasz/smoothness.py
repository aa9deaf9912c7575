"""Weighted sup norms, moduli of smoothness, Steklov means and K-functional
estimates on [0, oo), computed over a finite window [0, x_max].

Grid suprema are lower bounds of the true suprema. Estimates that are
compared against each other are therefore always taken over the same grid.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError

SATURATION_FLOOR = 1e-14


@dataclass(frozen=True)
class WeightedSpace:
    """Polynomial weight w_N(x) = 1/(1 + x^N) (w_0 = 1) on a uniform grid."""

    N: int = 0
    x_max: float = 50.0
    grid_points: int = 4096

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 0:
            raise DomainError(f"weight order must be a nonnegative integer, got {self.N}")
        if not self.x_max > 0:
            raise DomainError("window must have positive length")
        if self.grid_points < 2:
            raise DomainError("grid needs at least both endpoints")

    def weight(self, x):
        x = np.asarray(x, dtype=float)
        if self.N == 0:
            return np.ones_like(x)
        return 1.0 / (1.0 + x**self.N)

    def grid(self):
        return np.linspace(0.0, self.x_max, self.grid_points)


@dataclass(frozen=True)
class ModulusEstimate:
    delta: float
    value: float
    kind: str
    h_samples: int


def weighted_norm(f, space, values=None):
    """max over the grid of w_N(x)|f(x)|.

    ``values`` may hold f already sampled on ``space.grid()``.
    """
    x = space.grid()
    fx = np.asarray(f(x) if values is None else values, dtype=float)
    return float(np.max(space.weight(x) * np.abs(fx)))


def second_difference(f, x, h):
    """Delta^2_h f(x) = f(x + 2h) - 2 f(x + h) + f(x)."""
    return f(x + 2 * h) - 2.0 * f(x + h) + f(x)


def _kink_points(f, h, x_max):
    """Points x where x, x + h or x + 2h hits a breakpoint of f."""
    pts = []
    for c in getattr(f, "breakpoints", ()):
        for m in (0.0, 1.0, 2.0):
            pts.append(c - m * h)
    pts = np.asarray(pts, dtype=float)
    return pts[(pts >= 0.0) & (pts <= x_max)]


def second_difference_profile(f, space, steps):
    """sup_x w_N(x)|Delta^2_h f(x)| for every h in ``steps`` (grid plus kinks)."""
    x = space.grid()
    w = space.weight(x)
    out = np.empty(len(steps))
    fx = f(x)
    for i, h in enumerate(steps):
        val = np.abs(f(x + 2 * h) - 2.0 * f(x + h) + fx) * w
        best = float(np.max(val))
        kinks = _kink_points(f, h, space.x_max)
        if kinks.size:
            best = max(best, float(np.max(np.abs(second_difference(f, kinks, h)) * space.weight(kinks))))
        out[i] = best
    return out


def modulus2_many(f, space, deltas, h_samples=64):
    """Second-order moduli for several deltas sharing one set of step samples.

    Each delta contributes the steps delta * i / h_samples, i = 1..h_samples;
    the modulus at delta is the max of the profile over all steps <= delta.
    """
    deltas = np.asarray(deltas, dtype=float)
    if np.any(deltas <= 0):
        raise DomainError("modulus step bound delta must be positive")
    frac = np.arange(1, h_samples + 1) / h_samples
    steps = np.unique((deltas[:, None] * frac[None, :]).ravel())
    profile = second_difference_profile(f, space, steps)
    running = np.maximum.accumulate(profile)
    idx = np.searchsorted(steps, deltas, side="right") - 1
    return running[idx]


def modulus2(f, space, delta, h_samples=64):
    """omega^2_N(f, delta) = sup_{0 < h <= delta} ||Delta^2_h f||_N over the grid."""
    value = float(modulus2_many(f, space, [delta], h_samples)[0])
    kind = "omega2" if space.N == 0 else "omega2_weighted"
    return ModulusEstimate(delta=float(delta), value=value, kind=kind, h_samples=h_samples)


def modulus1(f, space, delta, h_samples=64):
    """First-order modulus of continuity sup_{0 < h <= delta} sup_x |f(x+h) - f(x)|."""
    if not delta > 0:
        raise DomainError("modulus step bound delta must be positive")
    x = space.grid()
    fx = f(x)
    best = 0.0
    for h in delta * np.arange(1, h_samples + 1) / h_samples:
        best = max(best, float(np.max(np.abs(f(x + h) - fx))))
    return ModulusEstimate(delta=float(delta), value=best, kind="omega1", h_samples=h_samples)


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _steklov_nodes(h, quad_points):
    """Nodes u = s + t and weights for (2/h)^2 * integral over [0, h/2]^2."""
    z, w = _gauss_legendre(quad_points)
    a = h / 2.0
    s = a * (z + 1.0) / 2.0
    ws = w * a / 2.0
    u = (s[:, None] + s[None, :]).ravel()
    weights = (ws[:, None] * ws[None, :]).ravel() * (2.0 / h) ** 2
    return u, weights


def _kernel_nodes(h, breaks, quad_points):
    """Nodes/weights for (2/h)^2 * integral over [0, h/2]^2 of g(s + t).

    Reduces the square to int_0^h g(u) (a - |u - a|) du with a = h/2 and
    splits [0, h] at the kernel peak and at every breakpoint of g.
    """
    a = h / 2.0
    cuts = np.unique(np.clip(np.concatenate(([0.0, a, h], breaks)), 0.0, h))
    z, w = _gauss_legendre(quad_points)
    us, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        u = lo + (hi - lo) * (z + 1.0) / 2.0
        us.append(u)
        ws.append(w * (hi - lo) / 2.0 * (a - np.abs(u - a)))
    return np.concatenate(us), np.concatenate(ws) * (2.0 / h) ** 2


def steklov_mean(f, h, x, quad_points=32):
    """Modified Steklov mean (2/h)^2 int_0^{h/2} int_0^{h/2} [2f(x+s+t) - f(x+2(s+t))] ds dt.

    Tensor-product Gauss-Legendre for smooth f. When f declares breakpoints
    the double integral is reduced to a one-dimensional one in u = s + t and
    split where the integrand has kinks, which keeps the rule exact-order.
    Vectorized over ``x``.
    """
    if not h > 0:
        raise DomainError("Steklov step h must be positive")
    x = np.asarray(x, dtype=float)
    xs = np.atleast_1d(x)
    breakpoints = getattr(f, "breakpoints", ())
    if not breakpoints:
        u, w = _steklov_nodes(h, quad_points)
        out = (2.0 * f(xs[:, None] + u) - f(xs[:, None] + 2.0 * u)) @ w
    else:
        out = np.empty(xs.shape)
        offsets = np.concatenate([[c - xs, (c - xs) / 2.0] for c in breakpoints])
        kinked = np.any((offsets > 0.0) & (offsets < h), axis=0)
        # points whose integrand is smooth on [0, h] share one node set
        u, w = _kernel_nodes(h, np.empty(0), quad_points)
        smooth = xs[~kinked]
        out[~kinked] = (2.0 * f(smooth[:, None] + u) - f(smooth[:, None] + 2.0 * u)) @ w
        for i in np.flatnonzero(kinked):
            u, w = _kernel_nodes(h, offsets[:, i], quad_points)
            out[i] = (2.0 * f(xs[i] + u) - f(xs[i] + 2.0 * u)) @ w
    return float(out[0]) if x.ndim == 0 else out


def steklov_second_derivative(f, h, x):
    """f_h''(x) = h^-2 [8 Delta^2_{h/2} f(x) - Delta^2_h f(x)]."""
    if not h > 0:
        raise DomainError("Steklov step h must be positive")
    x = np.asarray(x, dtype=float)
    out = (8.0 * second_difference(f, x, h / 2.0) - second_difference(f, x, h)) / h**2
    return float(out) if out.ndim == 0 else out


def steklov_candidate_cost(f, space, delta, h, quad_points=32):
    """||f - f_h||_N + delta ||f_h''||_N over the grid."""
    x = space.grid()
    w = space.weight(x)
    gap = float(np.max(w * np.abs(f(x) - steklov_mean(f, h, x, quad_points))))
    curvature = float(np.max(w * np.abs(steklov_second_derivative(f, h, x))))
    return gap + delta * curvature


def k_functional_upper(f, space, delta, per_decade=20, decades_below=2, decades_above=1, quad_points=16):
    """Upper estimate of K_2(f; delta) = inf_g ||f - g|| + delta ||g''||.

    Minimizes over Steklov candidates g = f_h with h on a log ladder around
    sqrt(delta) (h = sqrt(delta) is always on the ladder).
    """
    if not delta > 0:
        raise DomainError("delta must be positive")
    root = np.sqrt(delta)
    exps = np.arange(-decades_below * per_decade, decades_above * per_decade + 1) / per_decade
    return min(steklov_candidate_cost(f, space, delta, root * 10.0**e, quad_points) for e in exps)


@dataclass(frozen=True)
class LipschitzEstimate:
    """Fitted exponent alpha in omega^2_N(f, delta) = O(delta^alpha)."""

    alpha: float
    saturated: bool
    deltas: tuple
    moduli: tuple


def fit_loglog_slope(x, y):
    """Least-squares slope of log y against log x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def lipschitz_alpha_estimate(f, space, deltas, h_samples=64):
    """Slope of log omega^2_N(f, delta) versus log delta.

    If the modulus vanishes (below 1e-14) at any delta the result is reported
    as saturated with ``alpha = nan``.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size < 3:
        raise DomainError("need at least three deltas")
    if np.any(np.diff(deltas) >= 0):
        raise DomainError("deltas must be strictly decreasing")
    moduli = [float(m) for m in modulus2_many(f, space, deltas, h_samples)]
    if min(moduli) < SATURATION_FLOOR:
        return LipschitzEstimate(float("nan"), True, tuple(deltas.tolist()), tuple(moduli))
    return LipschitzEstimate(fit_loglog_slope(deltas, moduli), False, tuple(deltas.tolist()), tuple(moduli))
