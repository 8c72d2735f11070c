"""Exact sparse polynomials in ``p`` and the root analytics built on them.

Every polynomial family here has integer (occasionally rational)
coefficients, so sign-change counts and the signs used to certify a root
bracket are computed exactly.  Root locations are found by bisection on
floats, falling back to exact evaluation wherever the float sign is not
trustworthy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .core import exp_sum_excess
from .errors import InvalidArgument, RootNotBracketed
from .solver import balanced, half_count

ROOT_TOL = 1e-12
SCAN_POINTS = 10_000


class SparsePolynomial:
    """Polynomial stored as ``(exponent, coefficient)`` pairs, increasing exponents."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[tuple[int, int | Fraction]] = ()):
        acc: dict[int, int | Fraction] = {}
        for e, c in terms:
            if e < 0 or int(e) != e:
                raise InvalidArgument(f"exponents must be non-negative integers, got {e}")
            acc[int(e)] = acc.get(int(e), 0) + c
        self.terms = tuple((e, c) for e, c in sorted(acc.items()) if c != 0)

    @classmethod
    def output(cls, sizes: Sequence[int]) -> "SparsePolynomial":
        """``sum(n p^n)`` over the class sizes."""
        return cls((n, n) for n in sizes)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"{c}*p^{e}" for e, c in self.terms).replace("+ -", "- ")

    def __eq__(self, other) -> bool:
        return isinstance(other, SparsePolynomial) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        return SparsePolynomial(self.terms + other.terms)

    def __neg__(self) -> "SparsePolynomial":
        return SparsePolynomial((e, -c) for e, c in self.terms)

    def __sub__(self, other: "SparsePolynomial") -> "SparsePolynomial":
        return self + (-other)

    def __mul__(self, k: int | Fraction) -> "SparsePolynomial":
        return SparsePolynomial((e, c * k) for e, c in self.terms)

    __rmul__ = __mul__

    @property
    def degree(self) -> int:
        return self.terms[-1][0] if self.terms else -1

    @property
    def coefficients(self) -> list:
        return [c for _, c in self.terms]

    def derivative(self) -> "SparsePolynomial":
        return SparsePolynomial((e - 1, e * c) for e, c in self.terms if e > 0)

    def __call__(self, p):
        if isinstance(p, np.ndarray):
            out = np.zeros_like(p, dtype=np.float64)
            for e, c in self.terms:
                out += float(c) * p**e
            return out
        return sum(float(c) * p**e for e, c in self.terms)

    def abs_bound(self, p: float) -> float:
        """``sum(|c| p^e)``: scale for the rounding error of ``self(p)``."""
        return sum(abs(float(c)) * abs(p) ** e for e, c in self.terms)

    def exact_value(self, p: int | Fraction | float) -> Fraction:
        return sum((Fraction(c) * Fraction(p) ** e for e, c in self.terms), Fraction(0))

    def exact_sign(self, p: float | Fraction) -> int:
        """Sign of the polynomial at ``p`` computed in exact integer arithmetic."""
        if not self.terms:
            return 0
        num, den = Fraction(p).as_integer_ratio()
        top = self.degree
        denoms = [Fraction(c).denominator for _, c in self.terms]
        scale = math.lcm(*denoms)
        total = 0
        for e, c in self.terms:
            c = Fraction(c) * scale
            total += int(c) * num**e * den ** (top - e)
        return (total > 0) - (total < 0)

    def sign(self, p: float) -> int:
        """Sign at a float ``p``; exact arithmetic is used when rounding could matter."""
        value = self(p)
        if abs(value) > 1e-13 * self.abs_bound(p) + 1e-300:
            return 1 if value > 0 else -1
        return self.exact_sign(p)

    def reversed(self) -> "SparsePolynomial":
        """``p^deg * self(1/p)``; maps roots in ``(1, inf)`` to roots in ``(0, 1)``."""
        top = self.degree
        return SparsePolynomial((top - e, c) for e, c in self.terms)

    def multiplicity_at_one(self) -> int:
        mult, poly = 0, self
        while poly and sum(poly.coefficients) == 0:
            mult += 1
            poly = poly.derivative()
        return mult

    def multiplicity_at_zero(self) -> int:
        return self.terms[0][0] if self.terms else 0


def sign_changes(poly: SparsePolynomial) -> int:
    """Number of sign alternations in the ordered non-zero coefficients."""
    if not poly:
        raise InvalidArgument("sign changes of the zero polynomial are undefined")
    signs = [1 if c > 0 else -1 for c in poly.coefficients]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


@dataclass(frozen=True)
class RootResult:
    root: float
    lo: float
    hi: float
    certified: bool
    residual: float


def isolate_root(
    poly: SparsePolynomial | Callable[[float], float],
    interval: tuple[float, float],
    tol: float = ROOT_TOL,
    certified_unique: bool = False,
) -> RootResult:
    """Bisect to a root in ``interval`` with absolute tolerance ``tol``.

    The endpoints must have opposite signs.  For a ``SparsePolynomial`` the
    signs come from ``SparsePolynomial.sign`` and the final bracket is checked
    exactly, which is what ``certified`` reports.  ``certified_unique`` lets a
    caller that knows there is exactly one root skip the endpoint check.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise InvalidArgument(f"empty interval {interval}")
    if isinstance(poly, SparsePolynomial):
        sign = poly.sign
        evaluate = poly
    else:
        evaluate = poly

        def sign(x):
            v = poly(x)
            return (v > 0) - (v < 0)

    s_lo, s_hi = sign(lo), sign(hi)
    if s_lo == 0:
        return RootResult(lo, lo, lo, True, abs(evaluate(lo)))
    if s_hi == 0:
        return RootResult(hi, hi, hi, True, abs(evaluate(hi)))
    if s_lo == s_hi and not certified_unique:
        raise RootNotBracketed(f"no sign change on [{lo}, {hi}]")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        s_mid = sign(mid)
        if s_mid == 0:
            lo = hi = mid
            break
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    root = 0.5 * (lo + hi)
    if isinstance(poly, SparsePolynomial):
        certified = lo == hi or poly.exact_sign(lo) * poly.exact_sign(hi) < 0
    else:
        certified = s_lo != s_hi
    return RootResult(root, lo, hi, certified, abs(evaluate(root)))


def _scan_brackets(poly: SparsePolynomial, lo: float, hi: float, points: int) -> list[tuple[float, float]]:
    grid = np.linspace(lo, hi, points + 2)[1:-1]
    values = poly(grid)
    bound = np.zeros_like(grid)
    for e, c in poly.terms:
        bound += abs(float(c)) * grid**e
    signs = np.sign(values).astype(int)
    unsure = np.abs(values) <= 1e-13 * bound + 1e-300
    for idx in np.flatnonzero(unsure):
        signs[idx] = poly.exact_sign(float(grid[idx]))
    nz = np.flatnonzero(signs)
    flips = np.flatnonzero(signs[nz[1:]] != signs[nz[:-1]])
    return [(float(grid[nz[f]]), float(grid[nz[f + 1]])) for f in flips]


def roots_in_unit_interval(poly: SparsePolynomial, points: int = SCAN_POINTS) -> list[RootResult]:
    """Roots in ``(0, 1)`` located by a dense sign scan followed by bisection."""
    return [isolate_root(poly, b) for b in _scan_brackets(poly, 0.0, 1.0, points)]


def positive_root_count(poly: SparsePolynomial, points: int = SCAN_POINTS) -> int:
    """Positive roots found numerically, counting the root at 1 with multiplicity."""
    inside = len(roots_in_unit_interval(poly, points))
    outside = len(roots_in_unit_interval(poly.reversed(), points))
    return inside + poly.multiplicity_at_one() + outside


# Polynomial families -------------------------------------------------------


@dataclass(frozen=True)
class TripartiteSplit:
    """The most even split of ``Z`` into three classes, ``beta1 >= beta2 >= beta3``."""

    Z: int

    def __post_init__(self):
        if self.Z < 3:
            raise InvalidArgument(f"a three-way split needs Z >= 3, got {self.Z}")

    @property
    def betas(self) -> tuple[int, int, int]:
        Z = self.Z
        r = Z % 3
        if r == 0:
            return (Z // 3,) * 3
        if r == 2:
            return ((Z + 1) // 3, (Z + 1) // 3, (Z - 2) // 3)
        return ((Z + 2) // 3, (Z - 1) // 3, (Z - 1) // 3)

    @property
    def deltas(self) -> tuple[int, int, int]:
        return tuple(self.Z - 3 * b for b in self.betas)

    @property
    def omega(self) -> float:
        return 1.0 / self.Z

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(sorted(self.betas))


def _c_polynomial() -> SparsePolynomial:
    return SparsePolynomial([(0, Fraction(-49, 50)), (1, 2), (4, -1)])


@lru_cache(maxsize=None)
def constant_c() -> float:
    """Root in ``(0, 1)`` of ``2x = x^4 + 0.98``."""
    return isolate_root(_c_polynomial(), (0.0, 1.0)).root


@dataclass(frozen=True)
class Constants:
    Z: int
    c: float
    p_1: float
    k_o: float


def constants(Z: int) -> Constants:
    c = constant_c()
    if Z % 3 == 0:
        k_o = Z * (3 - math.sqrt(3)) / 6
    else:
        k_o = Z / 2 - math.sqrt(3 * (Z * Z + 2)) / 6
    return Constants(Z, c, c ** (6 / Z), k_o)


def _check_fk_range(Z: int, k: int) -> None:
    if not 2 <= k <= half_count(Z) + 1 or k > Z:
        raise InvalidArgument(f"k must lie in 2..{min(Z, half_count(Z) + 1)} for Z={Z}, got {k}")


def output_poly(Z: int, k: int) -> SparsePolynomial:
    """Output polynomial of the balanced ``k``-class vector."""
    return SparsePolynomial.output(balanced(Z, k))


@lru_cache(maxsize=4096)
def build_f_k(Z: int, k: int) -> SparsePolynomial:
    """Marginal output of going from ``k - 1`` to ``k`` balanced classes."""
    _check_fk_range(Z, k)
    return output_poly(Z, k) - output_poly(Z, k - 1)


def marginal(Z: int, k: int) -> SparsePolynomial:
    """``build_f_k`` extended with ``k == 1`` meaning the single-class output ``Z p^Z``."""
    if k == 1:
        return output_poly(Z, 1)
    return build_f_k(Z, k)


def _check_def1(Z: int, k: int) -> None:
    if Z < 3:
        raise InvalidArgument(f"Z must be at least 3, got {Z}")
    if not 1 <= k <= Z // 2:
        raise InvalidArgument(f"k must lie in 1..{Z // 2}, got {k}")


def build_def1_f(Z: int, k: int) -> SparsePolynomial:
    """Twice the two-class output minus the three-class and one-class outputs."""
    _check_def1(Z, k)
    two = SparsePolynomial.output((k, Z - k))
    return 2 * two - SparsePolynomial.output(TripartiteSplit(Z).sizes) - output_poly(Z, 1)


def build_def1_g(Z: int, k: int) -> SparsePolynomial:
    """Like ``build_def1_f`` but against the three-class vector ``(k, k, l - k)``."""
    _check_def1(Z, k)
    if k >= TripartiteSplit(Z).betas[2]:
        raise InvalidArgument(f"g needs k < beta3={TripartiteSplit(Z).betas[2]}, got k={k}")
    l = Z - k
    two = SparsePolynomial.output((k, l))
    return 2 * two - SparsePolynomial.output((k, k, l - k)) - output_poly(Z, 1)


# Crossing roots and peaks --------------------------------------------------


@dataclass(frozen=True)
class CrossingRoot:
    """Unique root in ``(0, 1)`` of ``f_j - f_i``; ``f_j > f_i`` below it, ``<`` above."""

    Z: int
    i: int
    j: int
    p_ij: float
    certified: bool
    residual: float


def crossing_root(Z: int, i: int, j: int, points: int = SCAN_POINTS) -> CrossingRoot | None:
    """Crossing point of ``f_i`` and ``f_j`` (``i == 1`` is the one-class output).

    Returns ``None`` when the two functions are identical.
    """
    if not 1 <= i < j:
        raise InvalidArgument(f"need 1 <= i < j, got i={i}, j={j}")
    diff = marginal(Z, j) - marginal(Z, i)
    if not diff:
        return None
    brackets = _scan_brackets(diff, 0.0, 1.0, points)
    if not brackets:
        raise RootNotBracketed(f"no crossing found for Z={Z}, i={i}, j={j}")
    # bisect down to adjacent floats so the residual stays small even where
    # the difference is steep near p = 1
    res = isolate_root(diff, brackets[0], tol=0.0)
    certified = res.certified and len(brackets) == 1
    return CrossingRoot(Z, i, j, res.root, certified, res.residual)


@dataclass(frozen=True)
class PeakPoint:
    """Maximiser ``s_k`` of ``f_k`` on ``[0, 1]`` with its value."""

    Z: int
    k: int
    s_k: float
    value: float

    @property
    def point(self) -> tuple[float, float]:
        return (self.s_k, self.value)


def peak_point(Z: int, k: int, points: int = SCAN_POINTS) -> PeakPoint:
    f = build_f_k(Z, k)
    df = f.derivative()
    brackets = _scan_brackets(df, 0.0, 1.0, points)
    if len(brackets) != 1:
        raise RootNotBracketed(f"f_{k}' for Z={Z} has {len(brackets)} sign changes in (0, 1)")
    s = isolate_root(df, brackets[0]).root
    return PeakPoint(Z, k, s, f(s))


def x_point(Z: int, k: int) -> tuple[float, float]:
    """The peak of ``f_{k+1}``, a corner of the ``k``-class region."""
    return peak_point(Z, k + 1).point


# Second differences --------------------------------------------------------


def s_value(Z: int, k: int) -> int:
    """Sum of squared sizes of the balanced ``k``-class vector."""
    q, r = divmod(Z, k)
    return (k - r) * q * q + r * (q + 1) ** 2


@dataclass(frozen=True)
class SecondDifference:
    Z: int
    k: int
    s_prev: int
    s_k: int
    s_next: int

    @property
    def convex(self) -> bool:
        return self.s_prev + self.s_next >= 2 * self.s_k

    @property
    def equality(self) -> bool:
        return self.s_prev + self.s_next == 2 * self.s_k


def second_difference_S(Z: int, k: int) -> SecondDifference:
    if not 2 <= k <= Z - 1:
        raise InvalidArgument(f"k must lie in 2..{Z - 1}, got {k}")
    return SecondDifference(Z, k, s_value(Z, k - 1), s_value(Z, k), s_value(Z, k + 1))


def flat_step_conditions(Z: int, k: int) -> bool:
    """Equality conditions for the second difference of ``s_value``.

    Either three consecutive balanced vectors share the same base size, or
    ``k = Z/d + 1`` for a divisor ``d >= 2`` with ``Z >= 2d(d-1)``,
    ``q_{k+1} = q_k = d - 1`` and ``q_{k-1} = d``.
    """
    q_prev, q, q_next = Z // (k - 1), Z // k, Z // (k + 1)
    if q_prev == q == q_next:
        return True
    for d in range(2, Z + 1):
        if Z % d == 0 and k == Z // d + 1:
            return Z >= 2 * d * (d - 1) and q_next == q == d - 1 and q_prev == d
    return False


# Threshold probe ----------------------------------------------------------


@dataclass(frozen=True)
class ProbeReport:
    m: int
    a: float
    trials: int
    worst_margin: float
    witness: tuple[float, ...]
    tol: float

    @property
    def violation_found(self) -> bool:
        return self.worst_margin > self.tol


def probe_A(m: int, a: float, trials: int = 20_000, seed: int = 0, tol: float = 1e-12) -> ProbeReport:
    """Search for ``x`` with ``sum(x) = 0``, ``x_i <= -1/a`` and ``sum(e^x (1 + a x)) > m``.

    Combines a scan of the symmetric family ``(x, -x, 0, ..., 0)`` with random
    zero-sum vectors.  Not finding a violation is evidence, not proof.
    """
    if m < 2:
        raise InvalidArgument(f"m must be at least 2, got {m}")
    if not -1 < a < 0:
        raise InvalidArgument(f"a must lie in (-1, 0), got {a}")
    bound = -1.0 / a
    worst, witness = -math.inf, ()

    def consider(xs):
        nonlocal worst, witness
        margin = exp_sum_excess(xs, a)
        if margin > worst:
            worst, witness = margin, tuple(float(x) for x in xs)

    for x in np.linspace(0.0, bound, 2001)[1:]:
        consider([x, -x] + [0.0] * (m - 2))
        if m >= 3:
            consider([x, x, -2 * x] + [0.0] * (m - 3))
            if 2 * x <= bound:
                consider([-x, -x, 2 * x] + [0.0] * (m - 3))

    rng = np.random.default_rng(seed)
    for _ in range(trials):
        y = rng.standard_normal(m)
        y -= y.mean()
        top = y.max()
        if top <= 0:
            continue
        scale = rng.uniform(0.0, bound / top)
        consider(y * scale)
    return ProbeReport(m, a, trials, worst, witness, tol)
