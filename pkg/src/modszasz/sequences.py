"""Admissible sequences (b_n): increasing, b_1 >= 1, unbounded."""

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

FAMILIES = ("classical", "power", "geometric", "psum", "table")


@dataclass(frozen=True, eq=False)
class BnSequence:
    """A sequence family with its parameter, evaluable at any index n >= 1.

    Use the constructors :meth:`classical`, :meth:`power`, :meth:`geometric`,
    :meth:`psum` and :meth:`table` rather than building instances directly.
    """

    family: str
    param: float = None
    values: tuple = None
    _cache: list = field(default_factory=lambda: [0.0], repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @classmethod
    def classical(cls):
        return cls("classical")

    @classmethod
    def power(cls, m):
        if not m >= 1:
            raise DomainError(f"power family needs m >= 1, got {m}")
        return cls("power", float(m))

    @classmethod
    def geometric(cls, r):
        if not r > 1:
            raise DomainError(f"geometric family needs r > 1, got {r}")
        return cls("geometric", float(r))

    @classmethod
    def psum(cls, p):
        """b_n = sum_{N=1}^{n} N^{-p} with 0 <= p <= 1."""
        if not 0 <= p <= 1:
            raise DomainError(f"partial-sum family needs 0 <= p <= 1, got {p}")
        return cls("psum", float(p))

    @classmethod
    def table(cls, values):
        values = tuple(float(v) for v in values)
        if not values:
            raise DomainError("table sequence needs at least one value")
        return cls("table", values=values)

    def value(self, n):
        if int(n) != n or n < 1:
            raise DomainError(f"sequence index must be a positive integer, got {n!r}")
        n = int(n)
        if self.family == "classical":
            return float(n)
        if self.family == "power":
            return float(n) ** self.param
        if self.family == "geometric":
            try:
                return self.param**n
            except OverflowError:
                raise DomainError(f"b_{n} = {self.param!r}^{n} exceeds the double range") from None
        if self.family == "psum":
            return self._partial_sum(n)
        if n > len(self.values):
            raise DomainError(f"table sequence has {len(self.values)} values, index {n} requested")
        return self.values[n - 1]

    __call__ = value

    def _partial_sum(self, n):
        cache = self._cache
        if n < len(cache):
            return cache[n]
        with self._lock:
            have = len(cache)
            if n >= have:
                idx = np.arange(have, n + 1, dtype=float)
                # forward summation continuing from the cached prefix
                sums = np.cumsum(np.concatenate(([cache[-1]], idx ** -self.param)))[1:]
                cache.extend(sums.tolist())
        return cache[n]

    def spec(self):
        """Inverse of :func:`parse_sequence`."""
        if self.family == "classical":
            return "classical"
        if self.family == "table":
            return "table:" + ",".join(repr(v) for v in self.values)
        return f"{self.family}:{self.param!r}"

    def __eq__(self, other):
        if not isinstance(other, BnSequence):
            return NotImplemented
        return (self.family, self.param, self.values) == (other.family, other.param, other.values)

    def __hash__(self):
        return hash((self.family, self.param, self.values))

    def __repr__(self):
        return f"BnSequence({self.spec()!r})"


def value(seq, n):
    """b_n for the given sequence."""
    return seq.value(n)


@dataclass
class OrderingReport:
    valid: bool
    n_max: int
    violations: list
    notes: list


def validate(seq, n_max):
    """Check b_1 >= 1 and strict increase up to ``n_max``.

    Violations are report content, not errors. Divergence b_n -> oo cannot be
    checked numerically; it holds by construction for the built-in families and
    is left unchecked for tables.
    """
    if n_max < 2:
        raise DomainError("validate needs n_max >= 2")
    violations = []
    notes = []
    if seq.family == "table" and n_max > len(seq.values):
        notes.append(f"table has {len(seq.values)} values; checked up to that index")
        n_max = len(seq.values)
    vals = []
    for n in range(1, n_max + 1):
        try:
            vals.append(seq.value(n))
        except DomainError:
            notes.append(f"b_n not representable in double precision beyond n = {n - 1}")
            break
    n_max = len(vals)
    if not vals[0] >= 1.0:
        violations.append((1, f"b_1 = {vals[0]!r} < 1"))
    for n in range(2, n_max + 1):
        if not vals[n - 1] > vals[n - 2]:
            violations.append((n, f"b_{n} = {vals[n - 1]!r} <= b_{n - 1} = {vals[n - 2]!r}"))
    if seq.family == "psum":
        for n in range(1, n_max + 1):
            # b_n <= n holds with equality at p = 0; allow a few ulps of summation error
            if vals[n - 1] > n * (1 + 4 * np.finfo(float).eps):
                violations.append((n, f"b_{n} = {vals[n - 1]!r} > n"))
    if seq.family == "table":
        notes.append("divergence b_n -> infinity is not checked for tables")
    else:
        notes.append("divergence b_n -> infinity holds for this family by construction")
    return OrderingReport(valid=not violations, n_max=n_max, violations=violations, notes=notes)


def parse_sequence(text):
    """Parse ``classical | power:<m> | geometric:<r> | psum:<p> | table:<v1,v2,...>``."""
    text = text.strip()
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    try:
        if name == "classical" and not arg:
            return BnSequence.classical()
        if name == "table":
            return BnSequence.table(float(v) for v in arg.split(",") if v.strip())
        if name in ("power", "geometric", "psum") and arg:
            number = float(arg)
            if not math.isfinite(number):
                raise ValueError(arg)
            return getattr(BnSequence, name)(number)
    except (ValueError, DomainError) as exc:
        raise ConfigError(f"bad sequence spec {text!r}: {exc}") from exc
    raise ConfigError(f"unknown sequence spec {text!r}")
