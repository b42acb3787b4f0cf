"""Finite representations of boundary points and their bounded-horizon order.

A boundary point is described by an eventually periodic letter stream
``preamble . period period period ...``; its depth-k stage is the normal form
of the first k letters.  The order between two such points quantifies over
all depths, so answers are three-valued: True and False carry finite
certificates, Unknown carries the horizon that was exhausted.

Divisibility of a fixed element against a stream is decided exactly by
first-occurrence stripping: only the first unconsumed occurrence of a needed
letter can ever be moved to the front, and it sits at a fixed finite
position, so both success and failure are certified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Sequence

from .core import MonoidPresentation, TraceElement, left_divides, normal_form
from .errors import InputFormatError

DEFAULT_HORIZON = 8
DEFAULT_SEARCH_FACTOR = 4


@dataclass(frozen=True)
class BoundaryWord:
    """An eventually periodic decreasing sequence  preamble . period^inf."""

    presentation: MonoidPresentation
    preamble: tuple[int, ...]
    period: tuple[int, ...]

    def __post_init__(self):
        if not self.period:
            raise InputFormatError("boundary word needs a nonempty period")
        for g in self.preamble + self.period:
            if not 0 <= g < self.presentation.n:
                raise InputFormatError(f"generator index {g} out of range")

    @classmethod
    def parse(cls, p: MonoidPresentation, text: str) -> "BoundaryWord":
        """Parse the CLI syntax ``PREAMBLE(PERIOD)^inf``, e.g. ``x(xz)^inf``.

        Without parentheses the final letter is the period: ``x^inf``.
        """
        s = text.strip()
        if not s.endswith("^inf"):
            raise InputFormatError(f"boundary word {text!r} must end in '^inf'")
        body = s[: -len("^inf")]
        if body.endswith(")"):
            open_idx = body.rfind("(")
            if open_idx < 0:
                raise InputFormatError(f"unbalanced parentheses in {text!r}")
            pre = p.tokenize(body[:open_idx]) if body[:open_idx] else ()
            per = p.tokenize(body[open_idx + 1 : -1])
        else:
            letters = p.tokenize(body)
            if not letters:
                raise InputFormatError(f"boundary word {text!r} has no letters")
            pre, per = letters[:-1], letters[-1:]
        if not per:
            raise InputFormatError(f"boundary word {text!r} has an empty period")
        return cls(p, pre, per)

    def __str__(self) -> str:
        p = self.presentation
        return f"{p.word_str(self.preamble)}({p.word_str(self.period)})^inf" \
            if self.preamble else f"({p.word_str(self.period)})^inf"

    def letter(self, i: int) -> int:
        """Letter at stream position i (0-based)."""
        if i < len(self.preamble):
            return self.preamble[i]
        return self.period[(i - len(self.preamble)) % len(self.period)]

    @property
    def description_length(self) -> int:
        return len(self.preamble) + len(self.period)

    def occurs_beyond(self, g: int, start: int) -> bool:
        """Whether letter g appears at some stream position >= start."""
        if g in self.period:
            return True
        return g in self.preamble[start:] if start < len(self.preamble) else False


def prefix_element(bw: BoundaryWord, k: int) -> TraceElement:
    """Normal form of the first k stream letters (the k-th stage of the point)."""
    if k < 0:
        raise InputFormatError("prefix depth must be non-negative")
    return normal_form(bw.presentation, [bw.letter(i) for i in range(k)])


@dataclass(frozen=True)
class TriState:
    """True/False with a finite certificate, or Unknown with the horizon."""

    value: bool | None
    certificate: str
    horizon: int | None = None

    @property
    def is_true(self) -> bool:
        return self.value is True

    @property
    def is_false(self) -> bool:
        return self.value is False

    @property
    def is_unknown(self) -> bool:
        return self.value is None

    @classmethod
    def true(cls, certificate: str) -> "TriState":
        return cls(True, certificate)

    @classmethod
    def false(cls, certificate: str) -> "TriState":
        return cls(False, certificate)

    @classmethod
    def unknown(cls, horizon: int, note: str = "") -> "TriState":
        return cls(None, note or f"undecided at horizon {horizon}", horizon)

    def conj(self, other: "TriState") -> "TriState":
        """Three-valued conjunction: False dominates, then Unknown."""
        if self.is_false:
            return self
        if other.is_false:
            return other
        if self.is_unknown:
            return self
        if other.is_unknown:
            return other
        return TriState.true(f"{self.certificate}; {other.certificate}")

    def disj(self, other: "TriState") -> "TriState":
        """Three-valued disjunction: True dominates, then Unknown."""
        if self.is_true:
            return self
        if other.is_true:
            return other
        if self.is_unknown:
            return self
        if other.is_unknown:
            return other
        return TriState.false(f"{self.certificate}; {other.certificate}")


class _StreamCapExceeded(Exception):
    pass


def _divides_stream(
    p: MonoidPresentation,
    t: TraceElement,
    f: BoundaryWord,
    scan_cap: int | None = None,
) -> tuple[bool, int | str]:
    """Decide exactly whether t left-divides some stage f(k).

    Returns (True, k_min) with the least such k, or (False, reason).  The
    decision is exact: only the first unconsumed occurrence of each needed
    letter can be stripped, and each check inspects a finite stream prefix.
    Raises _StreamCapExceeded if the scan would pass ``scan_cap`` positions.
    """
    consumed: set[int] = set()
    names = p.generators
    max_pos = -1
    for g in t.word:
        nc_g = p._nc[g]
        seen = 0
        pos = 0
        limit = len(f.preamble) + len(f.period) + len(consumed) + 1
        while True:
            if scan_cap is not None and pos > scan_cap:
                raise _StreamCapExceeded()
            if pos >= limit and not f.occurs_beyond(g, pos):
                return False, (
                    f"letter-count: generator '{names[g]}' has no remaining supply "
                    f"in {f} after position {pos}"
                )
            if pos in consumed:
                pos += 1
                continue
            h = f.letter(pos)
            if h == g:
                if seen & nc_g:
                    blocker = next(
                        names[b] for b in range(p.n) if (seen >> b) & 1 and (nc_g >> b) & 1
                    )
                    return False, (
                        f"blocked: stripping '{names[g]}' is obstructed by "
                        f"non-commuting '{blocker}' before position {pos} in {f}"
                    )
                consumed.add(pos)
                max_pos = max(max_pos, pos)
                break
            seen |= 1 << h
            # a needed letter that never occurs again can be reported early
            if pos + 1 >= limit and not f.occurs_beyond(g, pos + 1):
                return False, (
                    f"letter-count: generator '{names[g]}' has no remaining supply "
                    f"in {f} after position {pos + 1}"
                )
            pos += 1
    return True, max_pos + 1


def divides_boundary(p: MonoidPresentation, t: TraceElement, f: BoundaryWord) -> tuple[bool, int | str]:
    """Public wrapper: does t left-divide some stage of f (exact, with witness)."""
    return _divides_stream(p, t, f)


def leq_bounded(
    f: BoundaryWord,
    g: BoundaryWord,
    horizon: int = DEFAULT_HORIZON,
    search_factor: int = DEFAULT_SEARCH_FACTOR,
) -> TriState:
    """Bounded-horizon decision of  f <= g  (every stage of g eventually
    divides a stage of f).

    For n = 1..H each query "does g(n) divide some f(k)" is decided exactly
    with a certificate; any failure refutes the order outright.  A True
    answer additionally requires the witness map n -> k_n to settle into a
    pattern periodic in g's period, which is returned as the certificate.
    The scan window is widened internally to cover one full periodic window
    so that reflexive and periodic cases certify at any user horizon.
    """
    if f.presentation != g.presentation:
        raise InputFormatError("boundary words live over different presentations")
    if horizon < 1:
        raise InputFormatError("horizon must be at least 1")
    p = f.presentation
    pg = len(g.period)
    n_lo = len(g.preamble) + 1
    # Witness patterns can repeat only after several whole g-periods (the
    # letters f supplies per period need not divide evenly), and preamble
    # interactions allow a finite irregular head before the pattern settles.
    # The window covers the head allowance plus three pattern periods, plus
    # the point where two eventually periodic streams must reveal a
    # difference (preambles + lcm of the periods); the latter makes both
    # answers exact for free monoids.
    pattern_max = pg * len(f.period)
    head_allowance = len(f.preamble) + len(g.preamble) + pattern_max
    divergence_bound = (
        max(len(f.preamble), len(g.preamble)) + lcm(len(f.period), pg) + 1
    )
    h_eff = max(horizon, n_lo + head_allowance + 3 * pattern_max, divergence_bound)
    witnesses: dict[int, int] = {}
    for n in range(1, h_eff + 1):
        gn = prefix_element(g, n)
        cap = max(n, 1) * (f.description_length + g.description_length) * search_factor
        try:
            ok, info = _divides_stream(p, gn, f, scan_cap=cap)
        except _StreamCapExceeded:
            return TriState.unknown(
                horizon, f"scan cap exceeded while testing stage n={n} at horizon {horizon}"
            )
        if not ok:
            return TriState.false(f"stage n={n}: {info}")
        witnesses[n] = info
    for mult in range(1, pattern_max // pg + 1):
        period = pg * mult
        for n_start in range(n_lo, h_eff - 3 * period + 2):
            tail = [
                witnesses[n + period] - witnesses[n]
                for n in range(n_start, h_eff - period + 1)
            ]
            if len(tail) >= 2 * period and len(set(tail)) == 1:
                one_period = {n: witnesses[n] for n in range(n_start, n_start + period)}
                pairs = ", ".join(f"{n}->{k}" for n, k in sorted(one_period.items()))
                head = (
                    f" after {n_start - 1} individually verified stage(s)"
                    if n_start > 1
                    else ""
                )
                return TriState.true(
                    f"periodic witnesses k_n ({pairs}), increment {tail[0]} "
                    f"per {mult} period(s) of length {pg}{head}"
                )
    return TriState.unknown(
        horizon, f"witnesses exist up to n={h_eff} but show no periodic pattern"
    )


def approx_equiv(f: BoundaryWord, g: BoundaryWord, horizon: int = DEFAULT_HORIZON) -> TriState:
    """Conjunction of the two bounded comparisons (boundary-point equality)."""
    return leq_bounded(f, g, horizon).conj(leq_bounded(g, f, horizon))


def tilde_related(f: BoundaryWord, g: BoundaryWord, horizon: int = DEFAULT_HORIZON) -> TriState:
    """One-step contact relation: f <= g or g <= f.

    The full identification on boundary points is the transitive closure of
    this relation; only the single step is computed here.
    """
    return leq_bounded(f, g, horizon).disj(leq_bounded(g, f, horizon))


# -- characters ---------------------------------------------------------------


@dataclass(frozen=True)
class Character:
    """0/1 evaluation on principal ideals, induced by a boundary word."""

    word: BoundaryWord
    horizon: int = DEFAULT_HORIZON


def char_eval(c: Character, t: TraceElement) -> int:
    """1 iff t left-divides some stage of the underlying boundary word.

    The stripping decision is exact, so both answers are certified; the
    horizon only caps the stream scan (never reached for eventually periodic
    words at these description lengths).
    """
    p = c.word.presentation
    cap = max(
        c.horizon * max(t.length, 1) * max(c.word.description_length, 1),
        c.word.description_length + t.length + 1,
    )
    try:
        ok, _ = _divides_stream(p, t, c.word, scan_cap=cap)
    except _StreamCapExceeded:
        return 0
    return 1 if ok else 0


def char_valid(
    p: MonoidPresentation, assignment: Sequence[tuple[TraceElement, int]]
) -> bool:
    """Check the hereditary character condition on finitely many principal
    ideals: whenever u is divisible by v and u gets value 1, v must too.
    """
    values: dict[TraceElement, int] = {}
    for t, val in assignment:
        if val not in (0, 1):
            raise InputFormatError(f"character value must be 0 or 1, got {val!r}")
        if t in values and values[t] != val:
            raise InputFormatError(
                f"conflicting values for ideal generator {p.word_str(t)}"
            )
        values[t] = val
    for u, vu in values.items():
        if vu != 1:
            continue
        for v, vv in values.items():
            if left_divides(p, v, u) and vv != 1:
                return False
    return True


@dataclass(frozen=True)
class GradedGeneratorMap:
    """A surjection-style homomorphism sending each source generator to a
    target generator (grading-preserving by construction)."""

    source: MonoidPresentation
    target: MonoidPresentation
    images: tuple[int, ...] = field(default=())

    @classmethod
    def from_names(
        cls, source: MonoidPresentation, target: MonoidPresentation, images: Sequence[str]
    ) -> "GradedGeneratorMap":
        if len(images) != source.n:
            raise InputFormatError(
                f"need exactly {source.n} generator images, got {len(images)}"
            )
        idx = []
        for name in images:
            letters = target.tokenize(name)
            if len(letters) != 1:
                raise InputFormatError(
                    f"image {name!r} is not a single generator (map must be graded)"
                )
            idx.append(letters[0])
        return cls(source, target, tuple(idx))

    def apply(self, q: TraceElement) -> TraceElement:
        return normal_form(self.target, [self.images[g] for g in q.word])


@dataclass(frozen=True)
class PulledBackCharacter:
    """Character on the source monoid obtained by evaluating through the map."""

    hom: GradedGeneratorMap
    base: Character

    def eval(self, q: TraceElement) -> int:
        return char_eval(self.base, self.hom.apply(q))


def char_pullback(hom: GradedGeneratorMap, c: Character) -> PulledBackCharacter:
    """Pull a character on the target back to an evaluator on the source."""
    if c.word.presentation != hom.target:
        raise InputFormatError("character does not live over the map's target")
    return PulledBackCharacter(hom, c)
