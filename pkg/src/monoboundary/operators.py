"""Truncated operator models on weighted spheres.

The depth-K sphere with its word-counting weights models the square-summable
functions on the boundary at finite depth.  Two operator families live here:

* S_x: the weight-corrected isometries between consecutive sphere spaces.
  Their entries carry a square-root weight ratio, kept exact by the Rad
  class, and the expected generator relations hold as exact identities.
* T_z: the literal composition operators (f -> f(z .)) with no weight
  correction.  These fail the delta relation by the weight ratio of the
  substitution, and the defect report quantifies that gap.

Operator norms are measured by seeded power iteration on the weight-
similarity transform; Hilbert-Schmidt defects are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .core import (
    DEFAULT_MAX_SPHERE,
    MonoidPresentation,
    TraceElement,
    left_quotient,
    multiply,
)
from .errors import InputFormatError
from .exact import Rad
from .graphs import UGraph, coconnected_components
from .measure import sphere_weights

NORM_TOLERANCE = 1e-10
NORM_MAX_ITER = 10_000
NORM_SEED = 0
DENSE_CUTOFF = 512


@dataclass(frozen=True)
class WeightedSphereSpace:
    """Depth-K sphere with word-counting weights and the induced inner product."""

    presentation: MonoidPresentation
    depth: int
    basis: tuple[TraceElement, ...]
    weights: tuple[Fraction, ...]

    @classmethod
    def build(
        cls, p: MonoidPresentation, depth: int, max_size: int = DEFAULT_MAX_SPHERE
    ) -> "WeightedSphereSpace":
        wt = sphere_weights(p, depth, max_size=max_size)
        basis = tuple(sorted(wt))
        return cls(p, depth, basis, tuple(wt[b] for b in basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @cached_property
    def _positions(self) -> dict[TraceElement, int]:
        return {t: i for i, t in enumerate(self.basis)}

    def index(self, t: TraceElement) -> int:
        try:
            return self._positions[t]
        except KeyError:
            raise InputFormatError(
                f"{self.presentation.word_str(t)} is not in the depth-{self.depth} sphere"
            ) from None

    def inner(self, f: dict[int, Fraction], g: dict[int, Fraction]) -> Fraction:
        """Weighted inner product of two coefficient vectors (real case)."""
        total = Fraction(0)
        for i, a in f.items():
            b = g.get(i)
            if b is not None:
                total += a * b * self.weights[i]
        return total


class ChainOperator:
    """Sparse operator between two weighted sphere spaces with exact entries."""

    def __init__(
        self,
        source: WeightedSphereSpace,
        target: WeightedSphereSpace,
        entries: dict[tuple[int, int], Rad],
    ):
        self.source = source
        self.target = target
        self.entries = {k: v for k, v in entries.items() if not v.is_zero}

    @classmethod
    def identity(cls, space: WeightedSphereSpace) -> "ChainOperator":
        one = Rad.from_rational(1)
        return cls(space, space, {(i, i): one for i in range(space.dim)})

    @classmethod
    def zero(cls, source: WeightedSphereSpace, target: WeightedSphereSpace) -> "ChainOperator":
        return cls(source, target, {})

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def compose(self, other: "ChainOperator") -> "ChainOperator":
        """self after other (matrix product self @ other)."""
        if other.target.depth != self.source.depth:
            raise InputFormatError(
                f"cannot compose: inner depths {other.target.depth} != {self.source.depth}"
            )
        by_mid: dict[int, list[tuple[int, Rad]]] = {}
        for (t, m), v in self.entries.items():
            by_mid.setdefault(m, []).append((t, v))
        out: dict[tuple[int, int], Rad] = {}
        for (m, s), vb in other.entries.items():
            for t, va in by_mid.get(m, ()):
                key = (t, s)
                prod = va * vb
                prev = out.get(key)
                out[key] = prod if prev is None else prev + prod
        return ChainOperator(other.source, self.target, out)

    def _check_spaces(self, other: "ChainOperator", what: str) -> None:
        if self.source != other.source or self.target != other.target:
            raise InputFormatError(f"operator {what} needs matching spaces")

    def __sub__(self, other: "ChainOperator") -> "ChainOperator":
        self._check_spaces(other, "difference")
        out = dict(self.entries)
        for key, v in other.entries.items():
            prev = out.get(key)
            out[key] = (-v) if prev is None else prev - v
        return ChainOperator(self.source, self.target, out)

    def __add__(self, other: "ChainOperator") -> "ChainOperator":
        self._check_spaces(other, "sum")
        out = dict(self.entries)
        for key, v in other.entries.items():
            prev = out.get(key)
            out[key] = v if prev is None else prev + v
        return ChainOperator(self.source, self.target, out)

    def gram(self, i: int, j: int) -> Rad:
        """Inner product of columns i and j in the target weights."""
        total = Rad.zero()
        wt = self.target.weights
        for (t, s), v in self.entries.items():
            if s == i:
                w = self.entries.get((t, j))
                if w is not None:
                    total = total + v * w * Rad.from_rational(wt[t])
        return total

    def pairing(self, i: int, j: int) -> Rad:
        """<A e_i, e_j> in the target inner product."""
        v = self.entries.get((j, i))
        if v is None:
            return Rad.zero()
        return v * Rad.from_rational(self.target.weights[j])

    def hs_defect_sq(self) -> Fraction:
        """Squared weighted Hilbert-Schmidt norm: sum of entry^2 * w_t / w_s."""
        total = Fraction(0)
        for (t, s), v in self.entries.items():
            total += v.sq * self.target.weights[t] / self.source.weights[s]
        return total

    def _scaled_triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Float entries of the weight-similarity transform D_t^1/2 A D_s^-1/2."""
        rows = np.empty(self.nnz, dtype=np.int64)
        cols = np.empty(self.nnz, dtype=np.int64)
        vals = np.empty(self.nnz, dtype=np.float64)
        wt = [float(w) for w in self.target.weights]
        ws = [float(w) for w in self.source.weights]
        for idx, ((t, s), v) in enumerate(sorted(self.entries.items())):
            rows[idx] = t
            cols[idx] = s
            vals[idx] = float(v) * np.sqrt(wt[t] / ws[s])
        return rows, cols, vals


def operator_norm(
    op: ChainOperator,
    tol: float = NORM_TOLERANCE,
    max_iter: int = NORM_MAX_ITER,
    seed: int = NORM_SEED,
) -> float:
    """Weighted operator norm via power iteration on the similarity transform.

    Deterministic: fixed seed, fixed iteration order.  Dense matmul below
    DENSE_CUTOFF dimensions, scattered sparse products above.
    """
    if op.nnz == 0:
        return 0.0
    rows, cols, vals = op._scaled_triplets()
    dim_s = op.source.dim
    dim_t = op.target.dim
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim_s)
    v /= np.linalg.norm(v)
    if max(dim_s, dim_t) <= DENSE_CUTOFF:
        dense = np.zeros((dim_t, dim_s))
        dense[rows, cols] = vals
        mat = dense.T @ dense
        def step(x):
            return mat @ x
    else:
        def step(x):
            av = np.zeros(dim_t)
            np.add.at(av, rows, vals * x[cols])
            out = np.zeros(dim_s)
            np.add.at(out, cols, vals * av[rows])
            return out
    lam_prev = 0.0
    for _ in range(max_iter):
        w = step(v)
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        v = w / norm_w
        lam = float(v @ step(v))
        if abs(lam - lam_prev) <= tol * max(abs(lam), 1.0):
            lam_prev = lam
            break
        lam_prev = lam
    return float(np.sqrt(max(lam_prev, 0.0)))


# -- the operator families ----------------------------------------------------


def _chain_spaces(
    p: MonoidPresentation, depth_src: int, depth_dst: int, max_size: int
) -> tuple[WeightedSphereSpace, WeightedSphereSpace]:
    return (
        WeightedSphereSpace.build(p, depth_src, max_size),
        WeightedSphereSpace.build(p, depth_dst, max_size),
    )


def iso_S(
    p: MonoidPresentation, x: int, depth: int, max_size: int = DEFAULT_MAX_SPHERE
) -> ChainOperator:
    """The weight-corrected isometry e_w -> rho * e_{x w} from depth-1 to depth.

    rho^2 = w_{K-1}(w) / w_K(xw), so column norms match the source weights
    exactly and S_x* S_x is the identity as an exact table.
    """
    if depth < 1:
        raise InputFormatError("isometry needs depth >= 1")
    if not 0 <= x < p.n:
        raise InputFormatError(f"generator index {x} out of range")
    src, dst = _chain_spaces(p, depth - 1, depth, max_size)
    gen = TraceElement((x,))
    entries: dict[tuple[int, int], Rad] = {}
    for si, w in enumerate(src.basis):
        xw = multiply(p, gen, w)
        ti = dst.index(xw)
        entries[(ti, si)] = Rad.sqrt(src.weights[si] / dst.weights[ti])
    return ChainOperator(src, dst, entries)


def adjoint_S(
    p: MonoidPresentation, x: int, depth: int, max_size: int = DEFAULT_MAX_SPHERE
) -> ChainOperator:
    """Adjoint of iso_S in the weighted inner products (depth to depth-1)."""
    if depth < 1:
        raise InputFormatError("adjoint needs depth >= 1")
    if not 0 <= x < p.n:
        raise InputFormatError(f"generator index {x} out of range")
    src, dst = _chain_spaces(p, depth, depth - 1, max_size)
    gen = TraceElement((x,))
    entries: dict[tuple[int, int], Rad] = {}
    for si, tau in enumerate(src.basis):
        w = left_quotient(p, gen, tau)
        if w is None:
            continue
        ti = dst.index(w)
        entries[(ti, si)] = Rad.sqrt(src.weights[si] / dst.weights[ti])
    return ChainOperator(src, dst, entries)


def op_T(
    p: MonoidPresentation,
    z: TraceElement,
    depth: int,
    max_size: int = DEFAULT_MAX_SPHERE,
) -> ChainOperator:
    """The literal composition operator (T_z f)(w) = f(z w), no weight factor.

    Maps depth to depth-|z|.  The missing weight factor is what the defect
    report exhibits: on the free monoid the pushforward of a cylinder under
    left multiplication shrinks by n^{-|z|}, so T_z scales squared norms by
    n^{|z|} on the affected cylinders instead of preserving them.
    """
    if depth < z.length:
        raise InputFormatError("depth must be at least |z|")
    src, dst = _chain_spaces(p, depth, depth - z.length, max_size)
    one = Rad.from_rational(1)
    entries: dict[tuple[int, int], Rad] = {}
    for ti, w in enumerate(dst.basis):
        zw = multiply(p, z, w)
        entries[(ti, src.index(zw))] = one
    return ChainOperator(src, dst, entries)


def adjoint_T(
    p: MonoidPresentation,
    z: TraceElement,
    depth: int,
    max_size: int = DEFAULT_MAX_SPHERE,
) -> ChainOperator:
    """True adjoint of op_T(.., depth) in the weighted spaces (depth-|z| to depth)."""
    if depth < z.length:
        raise InputFormatError("depth must be at least |z|")
    src, dst = _chain_spaces(p, depth - z.length, depth, max_size)
    entries: dict[tuple[int, int], Rad] = {}
    for si, w in enumerate(src.basis):
        zw = multiply(p, z, w)
        ti = dst.index(zw)
        entries[(ti, si)] = Rad.from_rational(src.weights[si] / dst.weights[ti])
    return ChainOperator(src, dst, entries)


def beta_action(
    p: MonoidPresentation,
    s: TraceElement,
    depth: int,
    max_size: int = DEFAULT_MAX_SPHERE,
) -> "BetaAction":
    """Pullback of left multiplication by s, with its measured norm constant.

    The exact bound is the square root of the largest weight ratio
    w_{K-|s|}(w) / w_K(sw); the measured value comes from power iteration.
    Contractivity is not assumed: on non-free monoids the constant exceeds 1.
    """
    op = op_T(p, s, depth, max_size=max_size)
    bound_sq = Fraction(0)
    for (ti, si) in op.entries:
        ratio = op.target.weights[ti] / op.source.weights[si]
        if ratio > bound_sq:
            bound_sq = ratio
    return BetaAction(op, bound_sq, operator_norm(op))


@dataclass(frozen=True)
class BetaAction:
    operator: ChainOperator
    norm_bound_sq: Fraction
    measured_norm: float


def range_projection(
    p: MonoidPresentation,
    gens: tuple[int, ...] | list[int],
    depth: int,
    max_size: int = DEFAULT_MAX_SPHERE,
) -> ChainOperator:
    """Product over x in gens of (1 - S_x S_x*) on the depth sphere.

    Each factor is exactly multiplication by the x-indivisibility indicator,
    so the product is the diagonal projection onto sphere elements that no
    listed generator divides.
    """
    space = WeightedSphereSpace.build(p, depth, max_size)
    one = Rad.from_rational(1)
    entries: dict[tuple[int, int], Rad] = {}
    for i, tau in enumerate(space.basis):
        # degree-1 left divisors of tau, not just the first normal-form letter
        divisors = {
            g for g in set(tau.word)
            if left_quotient(p, TraceElement((g,)), tau) is not None
        }
        if not divisors.intersection(gens):
            entries[(i, i)] = one
    return ChainOperator(space, space, entries)


def projection_mass(op: ChainOperator) -> Fraction:
    """Weighted mass of a diagonal projection's support (its squared HS norm)."""
    total = Fraction(0)
    for (t, s), v in op.entries.items():
        if t != s or v.as_rational() != 1:
            raise InputFormatError("projection_mass expects a 0/1 diagonal operator")
        total += op.target.weights[t]
    return total


@dataclass(frozen=True)
class DefectReport:
    """How far a relation is from holding on the truncated model."""

    label: str
    norm_defect: float
    hs_defect_sq: Fraction
    exceptional_mass: Fraction

    def __post_init__(self):
        if self.norm_defect < 0 or self.hs_defect_sq < 0 or self.exceptional_mass < 0:
            raise InputFormatError("defects must be non-negative")


def relation_defects(
    p: MonoidPresentation, depth: int, max_size: int = DEFAULT_MAX_SPHERE
) -> list[DefectReport]:
    """Quantified relation defects for the S-model and the literal T-model.

    Rows, in order: isometry per generator; commutation (plain and mixed)
    per commuting pair; orthogonality per non-commuting pair; the resolution
    of the identity; the range projection of each coconnected component
    (reported with its weighted mass); and the T-model delta rows that
    document the missing weight factor.
    """
    if depth < 1:
        raise InputFormatError("relation defects need depth >= 1")
    if depth < 2 and p.commute_pairs:
        raise InputFormatError(
            "commutation rows need depth >= 2 (two isometry steps)"
        )
    names = p.generators
    reports: list[DefectReport] = []

    def add(label: str, defect_op: ChainOperator, mass: Fraction = Fraction(0)):
        reports.append(
            DefectReport(
                label=label,
                norm_defect=operator_norm(defect_op),
                hs_defect_sq=defect_op.hs_defect_sq(),
                exceptional_mass=mass,
            )
        )

    S = {x: iso_S(p, x, depth, max_size) for x in range(p.n)}
    St = {x: adjoint_S(p, x, depth, max_size) for x in range(p.n)}
    if p.commute_pairs:
        S_minus = {x: iso_S(p, x, depth - 1, max_size) for x in range(p.n)}
        St_minus = {x: adjoint_S(p, x, depth - 1, max_size) for x in range(p.n)}
    W_prev = S[0].source
    W_top = S[0].target
    id_prev = ChainOperator.identity(W_prev)
    id_top = ChainOperator.identity(W_top)

    for x in range(p.n):
        add(f"S:isometry:{names[x]}", St[x].compose(S[x]) - id_prev)

    for x in range(p.n):
        for y in range(x + 1, p.n):
            if p.commutes(x, y):
                add(
                    f"S:commutation:{names[x]}|{names[y]}",
                    S[x].compose(S_minus[y]) - S[y].compose(S_minus[x]),
                )
                add(
                    f"S:adjoint-commutation:{names[x]}|{names[y]}",
                    St[x].compose(S[y]) - S_minus[y].compose(St_minus[x]),
                )
            else:
                add(f"S:orthogonality:{names[x]}|{names[y]}", St[x].compose(S[y]))

    total = ChainOperator.zero(W_top, W_top)
    for x in range(p.n):
        total = total + S[x].compose(St[x])
    add("S:completeness", total - id_top)

    graph = UGraph.from_presentation(p)
    for comp in coconnected_components(graph):
        gens = tuple(p.generators.index(v) for v in comp.vertices)
        proj = range_projection(p, gens, depth, max_size)
        mass = projection_mass(proj)
        add("S:range-projection:" + "".join(comp.vertices), proj, mass=mass)

    for x in range(p.n):
        Tx = op_T(p, TraceElement((x,)), depth, max_size)
        Tx_star = adjoint_T(p, TraceElement((x,)), depth, max_size)
        add(f"T:delta:{names[x]}|{names[x]}", Tx_star.compose(Tx) - ChainOperator.identity(Tx.source))
        for y in range(x + 1, p.n):
            Ty = op_T(p, TraceElement((y,)), depth, max_size)
            add(f"T:delta:{names[x]}|{names[y]}", Tx_star.compose(Ty))

    return reports
