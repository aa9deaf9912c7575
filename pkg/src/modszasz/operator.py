"""The modified Szász-Mirakjan operator S_n(f; x) = sum_k s_{b_n,k}(x) f(k / b_n).

Truncation is either tolerance driven (growth aware, so polynomially or
exponentially growing f do not hide mass in the tail) or fixed at a given
summation index.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import (
    DEFAULT_TERM_CAP,
    TAIL_SAFETY,
    BasisContext,
    basis_value,
    log_poisson_matrix,
    smallest_index,
    tail_cutoff,
)
from .errors import ConfigError, DomainError, EvaluationError, TruncationError

COMPENSATED_SUM_THRESHOLD = 10_000
BLOCK_BUDGET = 1 << 20  # entries per (x, k) weight block


@dataclass(frozen=True)
class EvalConfig:
    """Truncation settings for series evaluation.

    ``fixed_k``, when set, truncates at exactly k = fixed_k and ignores ``tol``.
    """

    tol: float = 1e-12
    term_cap: int = DEFAULT_TERM_CAP
    fixed_k: int = None

    def __post_init__(self):
        if not 0 < self.tol < 1:
            raise DomainError(f"tol must lie in (0, 1), got {self.tol}")
        if self.term_cap < 1:
            raise DomainError("term_cap must be positive")
        if self.fixed_k is not None and (int(self.fixed_k) != self.fixed_k or self.fixed_k < 0):
            raise DomainError(f"fixed_k must be a nonnegative integer, got {self.fixed_k}")


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A function of t >= 0 together with what is known about its growth.

    ``growth_gamma`` declares |f(t)| <= bound * (1 + t)**gamma (membership in
    C_gamma). ``kind == "exp"`` carries no gamma; its envelope is e^t instead.
    ``breakpoints`` lists points where f is not differentiable, which the
    smoothness estimators use to sample kinks exactly.
    """

    __test__ = False  # not a pytest class

    kind: str
    func: object
    param: float = None
    growth_gamma: float = None
    bound: float = 1.0
    second_derivative: object = None
    breakpoints: tuple = ()
    label: str = field(default=None)

    def __call__(self, t):
        return self.func(np.asarray(t, dtype=float))

    @property
    def name(self):
        return self.label or self.spec()

    def spec(self):
        if self.kind == "monomial":
            return f"monomial:{int(self.param)}"
        if self.kind == "absshift":
            return f"absshift:{self.param!r}"
        if self.kind in ("exp", "sin"):
            return self.kind
        return self.label or "custom"

    def __repr__(self):
        return f"TestFunction({self.spec()!r})"


def monomial(i):
    """e_i(t) = t**i."""
    if int(i) != i or i < 0:
        raise DomainError(f"monomial degree must be a nonnegative integer, got {i}")
    i = int(i)

    def f(t):
        return t**i if i else np.ones_like(t)

    def f2(t):
        return i * (i - 1) * t ** (i - 2) if i >= 2 else np.zeros_like(t)

    return TestFunction("monomial", f, param=i, growth_gamma=float(i), second_derivative=f2)


def exp_function():
    """f(t) = e^t. Not in any C_gamma; evaluable with an exponential envelope."""
    return TestFunction("exp", np.exp, second_derivative=np.exp)


def sine():
    return TestFunction("sin", np.sin, growth_gamma=0.0, second_derivative=lambda t: -np.sin(t))


def abs_shift(c):
    """f(t) = |t - c|, a Lip-1 function with a kink at c."""
    c = float(c)

    def f2(t):
        return np.where(t == c, np.nan, 0.0)

    return TestFunction(
        "absshift",
        lambda t: np.abs(t - c),
        param=c,
        growth_gamma=1.0,
        bound=max(1.0, abs(c)),
        second_derivative=f2,
        breakpoints=(c,),
    )


def custom(func, growth_gamma=None, bound=1.0, second_derivative=None, breakpoints=(), label=None):
    """Wrap an arbitrary vectorized callable.

    Without ``growth_gamma`` the function is treated as bounded by ``bound``.
    """
    return TestFunction(
        "custom",
        func,
        growth_gamma=growth_gamma,
        bound=bound,
        second_derivative=second_derivative,
        breakpoints=tuple(breakpoints),
        label=label,
    )


def parse_function(text):
    """Parse ``monomial:<i> | exp | sin | absshift:<c>``."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "monomial" and arg:
            return monomial(int(arg))
        if name == "absshift" and arg:
            return abs_shift(float(arg))
        if name == "exp" and not arg:
            return exp_function()
        if name == "sin" and not arg:
            return sine()
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad function spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown function spec {text!r}")


def _envelope(f):
    """(gamma, log bound, exponential?) describing |f(t)| <= bound * env(t)."""
    if f.kind == "exp":
        return 0.0, math.log(f.bound), True
    gamma = f.growth_gamma if f.growth_gamma is not None else 0.0
    return gamma, math.log(f.bound), False


def truncation_index(f, ctx, cfg, extra_gamma=0.0, scale=1.0):
    """Last summation index for a series with summands bounded by
    ``scale * (1 + k/b)**extra_gamma * |f(k/b)| * s_{b,k}(x)``.

    Starts from the plain Poisson cutoff and enlarges K until a geometric
    ratio bound on the weighted tail falls below ``tol``.
    """
    if cfg.fixed_k is not None:
        return int(cfg.fixed_k)
    K0 = tail_cutoff(ctx, cfg.tol, cfg.term_cap)
    if ctx.lam == 0.0:
        return K0
    gamma, log_bound, exponential = _envelope(f)
    gamma += extra_gamma
    log_bound += math.log(scale)
    if gamma == 0.0 and log_bound <= 0.0 and not exponential:
        return K0
    b, lam, log_lam = ctx.b, ctx.lam, ctx.log_lam
    step_growth = math.exp(1.0 / b) if exponential else 1.0

    def tail(K):
        k = K + 1
        rho = lam / (k + 1) * (1.0 + 1.0 / (b + k)) ** gamma * step_growth
        if rho >= 1.0:
            return math.inf
        log_u = -lam + k * log_lam - math.lgamma(k + 1.0) + gamma * math.log1p(k / b) + log_bound
        if exponential:
            log_u += k / b
        return math.exp(log_u) / (1.0 - rho)

    K = smallest_index(lambda k: tail(k) < TAIL_SAFETY * cfg.tol, K0, cfg.term_cap)
    if K is None:
        bound = tail(cfg.term_cap)
        raise TruncationError(
            f"weighted tail bound {bound:.3e} above tol={cfg.tol:.1e} at the cap K={cfg.term_cap}",
            bound=bound,
            index=cfg.term_cap,
        )
    return K


def lower_index(f, ctx, cfg, extra_gamma=0.0, scale=1.0):
    """First summation index: terms below it carry a certified mass under ``tol``.

    For k < lam the weights grow by lam/k, so the left tail is dominated by a
    geometric series ending at s_{b,k_lo-1}; on t <= x the envelope of f is
    at most its value at x. Fixed truncation always starts at 0.
    """
    if cfg.fixed_k is not None or ctx.lam < 64.0:
        return 0
    gamma, log_bound, exponential = _envelope(f)
    gamma += extra_gamma
    log_env = log_bound + math.log(scale) + gamma * math.log1p(ctx.x) + (ctx.x if exponential else 0.0)
    lam = ctx.lam

    def head(k_lo):
        k = k_lo - 1
        # a bound, so the plain lgamma form is accurate enough here
        log_term = -lam + k * ctx.log_lam - math.lgamma(k + 1.0) + log_env
        return math.exp(min(log_term, 700.0)) / (1.0 - k / lam)

    threshold = TAIL_SAFETY * cfg.tol
    lo, hi = 0, int(math.floor(lam))
    if head(hi) < threshold:
        return hi
    # head is increasing in k_lo; find the largest accepted value
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if head(mid) < threshold:
            lo = mid
        else:
            hi = mid
    return lo


def _node_values(f, b, K):
    t = np.arange(K + 1) / b
    with np.errstate(all="ignore"):
        vals = np.asarray(f(t), dtype=float)
    if vals.shape != t.shape:
        vals = np.broadcast_to(vals, t.shape)
    if not np.all(np.isfinite(vals)):
        bad = int(np.flatnonzero(~np.isfinite(vals))[0])
        raise EvaluationError(f"{f!r} is not finite at node k/b = {t[bad]!r}")
    return vals


def _sum(terms):
    if terms.size > COMPENSATED_SUM_THRESHOLD:
        return math.fsum(terms)
    return float(np.sum(terms))


def _resolve_b(seq, n):
    return float(seq.value(n))


def evaluate(f, b, x, cfg=None):
    """S(f; x) for an explicit sequence value ``b``. Vectorized over ``x``.

    Basis weights for many points are built as one (x, k) block at a time;
    each point still sums exactly its own window of indices, so the result
    for a given x does not depend on which other points are evaluated with it.
    """
    cfg = cfg or EvalConfig()
    xs = np.asarray(x, dtype=float)
    flat = np.atleast_1d(xs).ravel()
    ctxs = [BasisContext(b, xi) for xi in flat]
    Ks = [truncation_index(f, ctx, cfg) for ctx in ctxs]
    los = [lower_index(f, ctx, cfg) for ctx in ctxs]
    vals = _node_values(f, float(b), max(Ks))
    out = np.empty(flat.size)
    i = 0
    while i < flat.size:
        j, lo, hi = i + 1, los[i], Ks[i]
        while j < flat.size:
            new_lo, new_hi = min(lo, los[j]), max(hi, Ks[j])
            if (new_hi - new_lo + 1) * (j - i + 1) > BLOCK_BUDGET:
                break
            lo, hi, j = new_lo, new_hi, j + 1
        lam = [ctx.lam for ctx in ctxs[i:j]]
        weights = np.minimum(np.exp(log_poisson_matrix(lam, np.arange(lo, hi + 1))), 1.0)
        for r in range(j - i):
            a, z = los[i + r], Ks[i + r]
            out[i + r] = _sum(weights[r, a - lo : z - lo + 1] * vals[a : z + 1])
        i = j
    return float(out[0]) if xs.ndim == 0 else out.reshape(xs.shape)


def apply(f, seq, n, x, cfg=None):
    """S_n(f; x) with b = b_n taken from ``seq``."""
    return evaluate(f, _resolve_b(seq, n), x, cfg)


def second_derivative_repr_A(f, seq, n, x, cfg=None):
    """S_n''(f; x) as (b/x)^2 sum_k r_k(x) f(k/b) s_{b,k}(x), x > 0,
    with r_k(x) = (k/b - x)^2 - k/b^2."""
    cfg = cfg or EvalConfig()
    b = _resolve_b(seq, n)
    if not x > 0:
        raise DomainError("the weighted representation of S_n'' needs x > 0")
    ctx = BasisContext(b, x)
    # |r_k| <= ((1 + x)^2 + 1) (1 + k/b)^2
    scale = ((1.0 + x) ** 2 + 1.0) * (b / x) ** 2
    K = truncation_index(f, ctx, cfg, extra_gamma=2.0, scale=scale)
    lo = lower_index(f, ctx, cfg, extra_gamma=2.0, scale=scale)
    k = np.arange(lo, K + 1)
    t = k / b
    r = (t - x) ** 2 - k / b**2
    terms = r * _node_values(f, b, K)[lo:] * basis_value(ctx, k)
    return (b / x) ** 2 * _sum(terms)


def second_derivative_repr_B(f, seq, n, x, cfg=None):
    """S_n''(f; x) as b^2 sum_k Delta^2_{1/b} f(k/b) s_{b,k}(x), x >= 0."""
    cfg = cfg or EvalConfig()
    b = _resolve_b(seq, n)
    ctx = BasisContext(b, x)
    gamma, _, exponential = _envelope(f)
    shift = math.exp(2.0 / b) if exponential else (1.0 + 2.0 / b) ** gamma
    K = truncation_index(f, ctx, cfg, scale=4.0 * b**2 * shift)
    lo = lower_index(f, ctx, cfg, scale=4.0 * b**2 * shift)
    vals = _node_values(f, b, K + 2)
    second_diff = vals[2:] - 2.0 * vals[1:-1] + vals[:-2]
    terms = second_diff[lo:] * basis_value(ctx, np.arange(lo, K + 1))
    return b**2 * _sum(terms)
