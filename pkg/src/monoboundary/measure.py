"""Exact cylinder measures on the boundary, by rational word counting.

On the free monoid the canonical measure gives a depth-|v| cylinder mass
n**(-|v|) exactly.  For a general commutation monoid the pushforward measure
of a cylinder is approximated from below by counting, at depth k, the free
words whose image is divisible by the target element; the counts are exact
integers and the resulting lower bounds are nondecreasing in k.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    DEFAULT_MAX_SPHERE,
    MonoidPresentation,
    TraceElement,
    left_divides,
    normal_form,
    sphere,
)
from .errors import InputFormatError


def free_cylinder_measure(n: int, v: Sequence[int]) -> Fraction:
    """Mass n**(-|v|) of the depth-|v| cylinder at the free word v."""
    if n < 1:
        raise InputFormatError("free monoid rank must be at least 1")
    return Fraction(1, n ** len(v))


def fiber_counts(
    p: MonoidPresentation, k: int, max_size: int = DEFAULT_MAX_SPHERE
) -> dict[TraceElement, int]:
    """For each element of sphere(k), the number of length-k free words
    mapping onto it.  Computed by depth-synchronous dynamic programming;
    counts at depth k sum to n**k exactly.
    """
    if k < 0:
        raise InputFormatError("depth must be non-negative")
    with p._cache_lock:
        for j in range(k + 1):
            if j in p._fiber_cache:
                continue
            if j == 0:
                p._fiber_cache[0] = {normal_form(p, ()): 1}
                continue
            sphere(p, j, max_size=max_size)  # capacity guard
            prev = p._fiber_cache[j - 1]
            cur: dict[TraceElement, int] = {}
            for m, c in prev.items():
                base = m.word
                for g in range(p.n):
                    u = normal_form(p, base + (g,))
                    cur[u] = cur.get(u, 0) + c
            p._fiber_cache[j] = cur
        return p._fiber_cache[k]


def sphere_weights(
    p: MonoidPresentation, k: int, max_size: int = DEFAULT_MAX_SPHERE
) -> dict[TraceElement, Fraction]:
    """Fraction of length-k free words landing on each sphere element.

    Positive rationals summing to exactly 1.
    """
    counts = fiber_counts(p, k, max_size=max_size)
    denom = p.n ** k
    return {u: Fraction(c, denom) for u, c in counts.items()}


@dataclass(frozen=True)
class CylinderMeasure:
    """Exact depth-k lower bound for the boundary mass of a cylinder.

    ``count`` is the number of length-k free words whose image is divisible
    by ``target``; ``lower_bound`` = count / n**k.  Recomputing at depth k+1
    never decreases the bound.  ``exact`` marks the free-monoid case where
    the bound is the measure itself.
    """

    target: TraceElement
    depth: int
    count: int
    lower_bound: Fraction
    exact: bool


def monoid_cylinder_measure(
    p: MonoidPresentation,
    tau: TraceElement,
    k: int,
    max_size: int = DEFAULT_MAX_SPHERE,
) -> CylinderMeasure:
    """Exact count of depth-k free words divisible by tau, as a measure bound."""
    if k < tau.length:
        raise InputFormatError(
            f"depth {k} is smaller than the target length {tau.length}"
        )
    counts = fiber_counts(p, k, max_size=max_size)
    if tau.length == k:
        total = counts.get(tau, 0)
    else:
        total = sum(c for u, c in counts.items() if left_divides(p, tau, u))
    return CylinderMeasure(
        target=tau,
        depth=k,
        count=total,
        lower_bound=Fraction(total, p.n ** k),
        exact=p.is_free,
    )
