"""Canonical normal forms, multiplication, grading and left divisibility for
monoids presented by a commutation graph.

A presentation lists generators (their order fixes the lexicographic order)
and a set of unordered commuting pairs.  Free monoids have no pairs; a full
edge set gives the free commutative monoid.  Elements are kept in canonical
normal form: the lexicographically least word of the commutation class.

Everything here is immutable after construction and every operation is a
pure function, so concurrent use is safe.  The per-presentation caches are
transparent (idempotent values) and guarded by a reentrant lock.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import CapacityError, InputFormatError

DEFAULT_MAX_SPHERE = 10_000_000

FreeWord = tuple[int, ...]


@dataclass(frozen=True, order=True)
class TraceElement:
    """A monoid element as its canonical normal-form word of generator indices."""

    word: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.word)

    def __len__(self) -> int:
        return len(self.word)

    @property
    def is_identity(self) -> bool:
        return not self.word


IDENTITY = TraceElement(())


class MonoidPresentation:
    """Generators plus a commutation graph.

    ``generators`` is an ordered tuple of distinct symbols; ``commute_pairs``
    holds index pairs (i, j) with i < j meaning the two generators commute.
    """

    def __init__(self, generators: Sequence[str], commute: Iterable[tuple[str, str]] = ()):
        gens = tuple(generators)
        if not gens:
            raise InputFormatError("presentation needs at least one generator")
        if len(set(gens)) != len(gens):
            raise InputFormatError("generator symbols must be pairwise distinct")
        index = {g: i for i, g in enumerate(gens)}
        pairs: set[tuple[int, int]] = set()
        for a, b in commute:
            if a == b:
                raise InputFormatError(f"commute pair ({a!r}, {b!r}) repeats a symbol")
            if a not in index or b not in index:
                missing = a if a not in index else b
                raise InputFormatError(f"commute pair uses unknown generator {missing!r}")
            i, j = sorted((index[a], index[b]))
            pairs.add((i, j))
        self.generators = gens
        self.commute_pairs = frozenset(pairs)
        self._index = index
        n = len(gens)
        # noncommute masks: bit h set in nc[g] iff h does NOT commute with g
        # (a generator never commutes with itself).
        nc = [(1 << n) - 1 for _ in range(n)]
        for i, j in pairs:
            nc[i] &= ~(1 << j)
            nc[j] &= ~(1 << i)
        self._nc = tuple(nc)
        # transparent memoization: idempotent values, guarded for concurrent
        # callers (reentrant: fiber counting builds spheres under the lock)
        self._cache_lock = threading.RLock()
        self._sphere_cache: dict[int, tuple[TraceElement, ...]] = {}
        self._fiber_cache: dict[int, dict[TraceElement, int]] = {}

    # -- basic structure ----------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.generators)

    @property
    def is_free(self) -> bool:
        return not self.commute_pairs

    def commutes(self, i: int, j: int) -> bool:
        return i != j and not (self._nc[i] >> j) & 1

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MonoidPresentation)
            and self.generators == other.generators
            and self.commute_pairs == other.commute_pairs
        )

    def __hash__(self) -> int:
        return hash((self.generators, self.commute_pairs))

    def __repr__(self) -> str:
        rels = ", ".join(
            f"{self.generators[i]}{self.generators[j]}={self.generators[j]}{self.generators[i]}"
            for i, j in sorted(self.commute_pairs)
        )
        return f"<MonoidPresentation {' '.join(self.generators)}{' | ' + rels if rels else ''}>"

    # -- parsing and formatting ---------------------------------------------

    @classmethod
    def from_text(cls, text: str) -> "MonoidPresentation":
        """Parse the presentation file format.

        One declaration per line, ``#`` starts a comment::

            generators: x y z
            commute: x z

        Unknown keys and duplicate generator names are errors; the generator
        order in the file defines the lexicographic order.
        """
        gens: list[str] | None = None
        pairs: list[tuple[str, str]] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if ":" not in line:
                raise InputFormatError(f"line {lineno}: expected 'key: values', got {raw!r}")
            key, _, rest = line.partition(":")
            key = key.strip()
            tokens = rest.split()
            if key == "generators":
                if gens is not None:
                    raise InputFormatError(f"line {lineno}: duplicate 'generators' declaration")
                if not tokens:
                    raise InputFormatError(f"line {lineno}: empty generator list")
                gens = tokens
            elif key == "commute":
                if len(tokens) != 2:
                    raise InputFormatError(f"line {lineno}: 'commute' takes exactly two generators")
                pairs.append((tokens[0], tokens[1]))
            else:
                raise InputFormatError(f"line {lineno}: unknown key {key!r}")
        if gens is None:
            raise InputFormatError("presentation file lacks a 'generators' line")
        return cls(gens, pairs)

    @classmethod
    def from_file(cls, path) -> "MonoidPresentation":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read())

    def tokenize(self, text: str) -> FreeWord:
        """Split a space-free concatenation of generator names, longest match first."""
        by_len = sorted(self.generators, key=len, reverse=True)
        out: list[int] = []
        pos = 0
        while pos < len(text):
            for name in by_len:
                if text.startswith(name, pos):
                    out.append(self._index[name])
                    pos += len(name)
                    break
            else:
                raise InputFormatError(f"cannot read a generator at {text[pos:]!r}")
        return tuple(out)

    def free_word(self, letters: Sequence[int] | str) -> FreeWord:
        if isinstance(letters, str):
            return self.tokenize(letters)
        w = tuple(letters)
        for g in w:
            if not 0 <= g < self.n:
                raise InputFormatError(f"generator index {g} out of range (n={self.n})")
        return w

    def element(self, letters: Sequence[int] | str) -> TraceElement:
        return normal_form(self, self.free_word(letters))

    def word_str(self, word: Sequence[int] | TraceElement) -> str:
        if isinstance(word, TraceElement):
            word = word.word
        if not word:
            return "1"
        return "".join(self.generators[g] for g in word)


# -- operations --------------------------------------------------------------


def normal_form(p: MonoidPresentation, w: Sequence[int] | TraceElement) -> TraceElement:
    """Lexicographically least word reachable from ``w`` by swapping adjacent
    commuting letters.

    Greedy extraction: among letters whose earlier letters all commute with
    them, repeatedly move the smallest to the front.  Two free words map to
    equal elements iff they present the same monoid element.
    """
    letters = list(w.word if isinstance(w, TraceElement) else w)
    nc = p._nc
    n = p.n
    for g in letters:
        if not 0 <= g < n:
            raise InputFormatError(f"generator index {g} out of range (n={n})")
    out: list[int] = []
    while letters:
        seen = 0
        best_g = n
        best_j = -1
        for j, g in enumerate(letters):
            if g < best_g and not seen & nc[g]:
                best_g = g
                best_j = j
                if g == 0:
                    break
            seen |= 1 << g
        out.append(best_g)
        letters.pop(best_j)
    return TraceElement(tuple(out))


def canonical_hom(p: MonoidPresentation, w: Sequence[int]) -> TraceElement:
    """The canonical map from free words onto the monoid; same as normal_form.

    Exposed under its own name because measure and boundary code quantify
    over the fibers of this map.
    """
    return normal_form(p, w)


def multiply(p: MonoidPresentation, a: TraceElement, b: TraceElement) -> TraceElement:
    return normal_form(p, a.word + b.word)


def _strip_index(p: MonoidPresentation, rem: list[int], g: int) -> int | None:
    """Index of the first occurrence of ``g`` in ``rem`` if it can be moved to
    the front (all earlier letters commute with it), else None.

    Only the first occurrence can ever qualify: a later ``g`` is preceded by
    the first one, and no generator commutes with itself.
    """
    nc_g = p._nc[g]
    seen = 0
    for j, h in enumerate(rem):
        if h == g:
            return j if not seen & nc_g else None
        seen |= 1 << h
    return None


def left_divides(p: MonoidPresentation, t: TraceElement, w: TraceElement) -> bool:
    """True iff w = t * s for some s (t is a left divisor of w)."""
    if t.length > w.length:
        return False
    if t.length == w.length:
        return t == w
    rem = list(w.word)
    for g in t.word:
        j = _strip_index(p, rem, g)
        if j is None:
            return False
        rem.pop(j)
    return True


def left_quotient(p: MonoidPresentation, t: TraceElement, w: TraceElement) -> TraceElement | None:
    """The unique s with w = t * s when t left-divides w, else None."""
    if t.length > w.length:
        return None
    rem = list(w.word)
    for g in t.word:
        j = _strip_index(p, rem, g)
        if j is None:
            return None
        rem.pop(j)
    return normal_form(p, rem)


def sphere(p: MonoidPresentation, k: int, max_size: int = DEFAULT_MAX_SPHERE) -> tuple[TraceElement, ...]:
    """All elements of length exactly k, in normal form, sorted.

    Enumerates by extending length-(k-1) normal forms by one generator and
    deduplicating, so only genuine elements are materialized.  Raises
    CapacityError when a sphere would exceed ``max_size``.
    """
    if k < 0:
        raise InputFormatError("sphere depth must be non-negative")
    with p._cache_lock:
        for j in range(k + 1):
            shell = p._sphere_cache.get(j)
            if shell is None:
                if j == 0:
                    shell = (IDENTITY,)
                else:
                    prev = p._sphere_cache[j - 1]
                    found = {
                        normal_form(p, m.word + (g,))
                        for m in prev
                        for g in range(p.n)
                    }
                    shell = tuple(sorted(found))
                p._sphere_cache[j] = shell
            if len(shell) > max_size:
                raise CapacityError(
                    f"sphere at depth {j} has {len(shell)} elements (cap {max_size})",
                    depth_reached=j - 1,
                )
        return p._sphere_cache[k]


def cocone(p: MonoidPresentation, t: TraceElement) -> frozenset[TraceElement]:
    """All left divisors of t (a finite set containing the identity and t)."""
    divisors: set[TraceElement] = set()
    stack: list[tuple[TraceElement, tuple[int, ...]]] = [(IDENTITY, t.word)]
    while stack:
        div, rem = stack.pop()
        if div in divisors:
            continue
        divisors.add(div)
        rem_list = list(rem)
        for g in set(rem):
            j = _strip_index(p, rem_list, g)
            if j is None:
                continue
            child = multiply(p, div, TraceElement((g,)))
            if child not in divisors:
                stack.append((child, rem[:j] + rem[j + 1:]))
    return frozenset(divisors)


def interval(p: MonoidPresentation, t: TraceElement, w: TraceElement) -> frozenset[TraceElement]:
    """Elements x with w left-dividing x and x left-dividing t."""
    return frozenset(x for x in cocone(p, t) if left_divides(p, w, x))
