"""Domain types and profit evaluation for the single-type school.

A school has ``Z`` students, each of whom independently refrains from
disrupting class with probability ``p``.  A class of ``n`` students produces
``n * p**n`` units of learning worth ``V`` each, and every class costs ``W``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import InvalidArgument


def canonical(sizes: Iterable[int]) -> tuple[int, ...]:
    """Validate a class-size vector and return it sorted non-decreasingly."""
    out = tuple(sorted(sizes))
    if any(int(n) != n for n in out):
        raise InvalidArgument(f"class sizes must be integers, got {out}")
    out = tuple(int(n) for n in out)
    if not out:
        raise InvalidArgument("a class-size vector needs at least one class")
    if out[0] < 1:
        raise InvalidArgument(f"class sizes must be positive, got {out}")
    return out


def _check_p(p: float) -> None:
    if not (0.0 < p <= 1.0):
        raise InvalidArgument(f"p must lie in (0, 1], got {p}")


@dataclass(frozen=True)
class Instance:
    """A single-type school: ``Z`` students, probability ``p``, teacher cost ``W``."""

    Z: int
    p: float
    W: float
    V: float = 1.0

    def __post_init__(self):
        if int(self.Z) != self.Z or self.Z < 1:
            raise InvalidArgument(f"Z must be a positive integer, got {self.Z}")
        _check_p(self.p)
        if not self.W > 0:
            raise InvalidArgument(f"W must be positive, got {self.W}")
        if not self.V > 0:
            raise InvalidArgument(f"V must be positive, got {self.V}")

    def reduced(self) -> "LazearReduced":
        return LazearReduced(a=self.Z * math.log(self.p), lambda0=self.W / (self.Z * self.V))


@dataclass(frozen=True)
class LazearReduced:
    """Lazear's objective rescaled by ``Z*V``: ``h(m) = exp(a/m) - lambda0*m``."""

    a: float
    lambda0: float

    def h(self, m: int) -> float:
        if m == 0:
            return 0.0
        return math.exp(self.a / m) - self.lambda0 * m

    def best_class_count(self, max_m: int) -> int:
        """Smallest integer ``m`` in ``1..max_m`` maximising ``h``."""
        best_m, best_h = 1, self.h(1)
        for m in range(2, max_m + 1):
            value = self.h(m)
            if value > best_h:
                best_m, best_h = m, value
        return best_m


@dataclass(frozen=True)
class SolveResult:
    best: tuple[int, ...]
    profit: float

    @property
    def profitable(self) -> bool:
        return self.profit > 0

    @property
    def m(self) -> int:
        return len(self.best)

    @property
    def spread(self) -> int:
        return self.best[-1] - self.best[0]


def evaluate_output(sizes: Sequence[int], p: float) -> float:
    """Total learning ``sum(n * p**n)``, summed in canonical (sorted) order."""
    _check_p(p)
    return sum(n * p**n for n in canonical(sizes))


def evaluate_profit(inst: Instance, sizes: Sequence[int]) -> float:
    sizes = canonical(sizes)
    if sum(sizes) != inst.Z:
        raise InvalidArgument(f"class sizes sum to {sum(sizes)}, expected Z={inst.Z}")
    return inst.V * evaluate_output(sizes, inst.p) - len(sizes) * inst.W


def evaluate_lazear(inst: Instance, m: int) -> float:
    """Lazear's profit ``Z*V*p**(Z/m) - m*W``; ``m`` need not divide ``Z``."""
    if int(m) != m or not 1 <= m <= inst.Z:
        raise InvalidArgument(f"m must be an integer in 1..{inst.Z}, got {m}")
    return inst.Z * inst.V * inst.p ** (inst.Z / m) - m * inst.W


@dataclass(frozen=True)
class LazearComparison:
    alt_profit: float
    lazear_profit: float
    m: int
    lazear_m: int
    hypothesis_met: bool
    dominated: bool | None  # None when the hypothesis is not met
    equal: bool

    @property
    def gap(self) -> float:
        return self.lazear_profit - self.alt_profit


def lazear_dominates(inst: Instance, result: SolveResult, rel_tol: float = 1e-12) -> LazearComparison:
    """Compare the optimum of the class-size objective with Lazear's profit at the same m.

    The bound ``alt <= lazear`` is asserted only for a profitable optimum whose
    Lazear-optimal class count exceeds ``-Z ln p``; otherwise ``dominated`` is
    ``None``.
    """
    m = result.m
    alt = result.profit
    lazear = evaluate_lazear(inst, m)
    reduced = inst.reduced()
    lazear_m = reduced.best_class_count(inst.Z)
    hypothesis = result.profitable and lazear_m > -reduced.a
    scale = max(1.0, abs(alt), abs(lazear))
    equal = abs(lazear - alt) <= rel_tol * scale
    dominated = (alt <= lazear + rel_tol * scale) if hypothesis else None
    return LazearComparison(alt, lazear, m, lazear_m, hypothesis, dominated, equal)


# Scalar inequalities used by the near-equal-sizes argument.

def exp_pair_sum(x: float, a: float) -> float:
    """``e^x (1 + a x) + e^-x (1 - a x)``; at most 2 whenever ``a <= -1/2``."""
    return math.exp(x) * (1 + a * x) + math.exp(-x) * (1 - a * x)


def two_class_share_output(lam: float, q: float) -> float:
    """``lam q^lam + (1 - lam) q^(1 - lam)``; output share of a two-class split."""
    return lam * q**lam + (1 - lam) * q ** (1 - lam)


def tilted_power_pair(d: float, w: float) -> float:
    """``d^w (1 + w) + d^-w (1 - w)``; at most 2 for ``e^-2 <= d < 1``."""
    return d**w * (1 + w) + d ** (-w) * (1 - w)


def exp_sum_excess(xs: Sequence[float], a: float) -> float:
    """``sum(e^x (1 + a x)) - len(xs)``; positive values violate the threshold bound."""
    return sum(math.exp(x) * (1 + a * x) for x in xs) - len(xs)
