"""Exact moment calculus for S_n.

S_n(t^r; x) = sum_{j=1}^{r} a[r][j] x^j b^(j-r), where the integer table
satisfies a[r+1][j] = j a[r][j] + a[r][j-1]. Central moments are expanded
binomially and collected into integer-coefficient polynomials in (x, 1/b)
before any floating point evaluation, so float mode does not suffer from the
cancellation a direct binomial sum would.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import DomainError

DEFAULT_R_MAX = 64


@dataclass(frozen=True)
class MomentTable:
    """Triangular table a[r][j], 1 <= j <= r <= r_max, of Python integers.

    ``a[r]`` is a tuple of length r + 1 with ``a[r][0] == 0`` so that indices
    match the mathematical ones.
    """

    r_max: int
    a: tuple

    def coeff(self, r, j):
        self._check_r(r)
        if not 1 <= j <= r:
            raise DomainError(f"coefficient index j={j} outside 1..{r}")
        return self.a[r][j]

    def polynomial(self, r):
        """The raw-moment polynomial of degree r."""
        self._check_r(r)
        return MomentPolynomial(r, tuple((j, self.a[r][j], j - r) for j in range(1, r + 1)))

    def _check_r(self, r):
        if not 1 <= r <= self.r_max:
            raise DomainError(f"moment order {r} outside table range 1..{self.r_max}")


@dataclass(frozen=True)
class MomentPolynomial:
    """sum over terms of coeff * x^j * b^b_exponent."""

    r: int
    terms: tuple

    def __call__(self, x, b):
        return sum(c * x**j * b**e for j, c, e in self.terms)


def build_table(r_max=DEFAULT_R_MAX):
    if r_max < 1:
        raise DomainError("r_max must be at least 1")
    rows = [(0,), (0, 1)]
    for r in range(1, r_max):
        prev = rows[r]
        row = [0] * (r + 2)
        for j in range(1, r + 2):
            upper = j * prev[j] if j <= r else 0
            row[j] = upper + prev[j - 1]
        rows.append(tuple(row))
    return MomentTable(r_max, tuple(rows))


def _coerce(x, b, exact):
    if exact:
        return Fraction(x), Fraction(b)
    return float(x), float(b)


def _check_args(x, b):
    if x < 0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if b < 1:
        raise DomainError(f"b must be at least 1, got {b}")


def raw_moment(table, r, x, b, exact=False):
    """S_n(t^r; x). With ``exact=True`` the result is a Fraction."""
    x, b = _coerce(x, b, exact)
    _check_args(x, b)
    if r == 0:
        return Fraction(1) if exact else 1.0
    inv_b = 1 / b
    return sum(c * x**j * inv_b ** (-e) for j, c, e in table.polynomial(r).terms)


def collect(table, combination):
    """Collect sum_i coeff_i * x^{p_i} * S_n(t^{r_i}; x) into {(x power, b power): int}.

    ``combination`` is an iterable of (coeff, p, r) with integer coeff.
    Zero coefficients are dropped.
    """
    out = {}
    for coeff, p, r in combination:
        if r == 0:
            terms = ((0, 1, 0),)
        else:
            terms = table.polynomial(r).terms
        for j, c, e in terms:
            key = (j + p, e)
            out[key] = out.get(key, 0) + coeff * c
    return {k: v for k, v in sorted(out.items()) if v}


def central_polynomial(table, m):
    """mu_m(x) = S_n((t - x)^m; x) as {(x power, b power): integer coefficient}."""
    if not 0 <= m <= table.r_max:
        raise DomainError(f"central moment order {m} outside 0..{table.r_max}")
    return collect(table, ((comb(m, i) * (-1) ** (m - i), m - i, i) for i in range(m + 1)))


def evaluate_collected(poly, x, b, exact=False):
    x, b = _coerce(x, b, exact)
    inv_b = 1 / b
    return sum(c * x**p * inv_b ** (-e) for (p, e), c in poly.items()) + (Fraction(0) if exact else 0.0)


def central_moment(table, m, x, b, exact=False):
    """mu_{n,m}(x) = sum_i C(m,i) (-x)^(m-i) S_n(t^i; x)."""
    x_c, b_c = _coerce(x, b, exact)
    _check_args(x_c, b_c)
    return evaluate_collected(central_polynomial(table, m), x, b, exact)


def central_moment_direct(table, m, x, b, exact=False):
    """Same quantity via the plain binomial sum of raw moments (no collection)."""
    x, b = _coerce(x, b, exact)
    _check_args(x, b)
    if not 0 <= m <= table.r_max:
        raise DomainError(f"central moment order {m} outside 0..{table.r_max}")
    return sum(comb(m, i) * (-x) ** (m - i) * raw_moment(table, i, x, b, exact) for i in range(m + 1))


def coefficient_identity_check(table, N):
    """Whether a[N+2][N+1] - 2 a[N+1][N] + a[N][N-1] == 1 (exact)."""
    if not 2 <= N <= table.r_max - 2:
        raise DomainError(f"identity index N={N} outside 2..{table.r_max - 2}")
    a = table.a
    return a[N + 2][N + 1] - 2 * a[N + 1][N] + a[N][N - 1] == 1


def weighted_second_moment_polynomial(table, N):
    """S_n((t - x)^2 t^N; x) collected as {(x power, b power): int}."""
    return collect(table, ((1, 0, N + 2), (-2, 1, N + 1), (1, 2, N)))
