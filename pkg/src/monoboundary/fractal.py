"""Contracting affine actions, attractor clouds, boundary-to-attractor maps
with certified error, and interval-valued contact measures.

Map coefficients are parsed as exact rationals (decimal or p/q tokens), so
the geometric tests behind the contact measure run in exact arithmetic: a
depth-k free word contributes its uniform mass to a cell's lower bound when
the enclosure of its whole cylinder lies inside the cell, and to the upper
bound when the enclosure meets the cell interior.  The enclosure is the
image of the invariant ball, radius (contraction bound)^k * R around the
image of the ball center, which is tight enough to separate touching cells
exactly.

Float arithmetic is used for point clouds, norms and rendering only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .boundary import BoundaryWord, prefix_element
from .core import MonoidPresentation, TraceElement
from .errors import CapacityError, InputFormatError
from .exact import fraction_sqrt, fraction_sqrt_upper

DEFAULT_MAX_POINTS = 2_000_000
DEFAULT_MAX_CELLS = 10_000_000
RELATION_TOLERANCE = 1e-9

ExactVec = tuple[Fraction, ...]


def _mat_vec(A: tuple[tuple[Fraction, ...], ...], v: ExactVec) -> ExactVec:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in A)


def _solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> ExactVec:
    """Gaussian elimination over the rationals (small systems only)."""
    d = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(d):
        pivot = next((r for r in range(col, d) if M[r][col] != 0), None)
        if pivot is None:
            raise InputFormatError("singular linear system for a fixed point")
        M[col], M[pivot] = M[pivot], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(d):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return tuple(M[i][d] for i in range(d))


@dataclass(frozen=True)
class AffineMap:
    """x -> A x + b with exact rational coefficients."""

    dimension: int
    matrix: tuple[tuple[Fraction, ...], ...]
    translation: ExactVec

    def __post_init__(self):
        d = self.dimension
        if len(self.matrix) != d or any(len(r) != d for r in self.matrix) or len(self.translation) != d:
            raise InputFormatError("affine map shape does not match its dimension")

    @cached_property
    def matrix_f(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.matrix])

    @cached_property
    def translation_f(self) -> np.ndarray:
        return np.array([float(x) for x in self.translation])

    @cached_property
    def lipschitz(self) -> float:
        """Operator (spectral) norm of the linear part."""
        return float(np.linalg.norm(self.matrix_f, 2))

    @cached_property
    def lipschitz_sq_bound(self) -> Fraction:
        """Rational upper bound on lipschitz^2; exact for diagonal matrices.

        For general matrices the cheapest sound rational bounds (column-row
        norm product, squared Frobenius norm) can exceed 1 even for genuine
        contractions, so they are capped by the float spectral norm inflated
        by 1e-9 (orders of magnitude beyond LAPACK's error on these tiny
        matrices).
        """
        d = self.dimension
        if all(self.matrix[i][j] == 0 for i in range(d) for j in range(d) if i != j):
            return max(self.matrix[i][i] ** 2 for i in range(d))
        one_norm = max(sum(abs(self.matrix[i][j]) for i in range(d)) for j in range(d))
        inf_norm = max(sum(abs(x) for x in row) for row in self.matrix)
        frob_sq = sum(x * x for row in self.matrix for x in row)
        inflated = (Fraction(self.lipschitz) * (1 + Fraction(1, 10 ** 9))) ** 2
        return min(one_norm * inf_norm, frob_sq, inflated)

    def apply_exact(self, v: ExactVec) -> ExactVec:
        img = _mat_vec(self.matrix, v)
        return tuple(img[i] + self.translation[i] for i in range(self.dimension))

    def apply_points(self, pts: np.ndarray) -> np.ndarray:
        return pts @ self.matrix_f.T + self.translation_f

    def fixed_point(self) -> ExactVec:
        d = self.dimension
        eye_minus = [
            [Fraction(int(i == j)) - self.matrix[i][j] for j in range(d)]
            for i in range(d)
        ]
        return _solve_exact(eye_minus, list(self.translation))


@dataclass(frozen=True)
class IfsAction:
    """One affine contraction per generator, with the derived invariant ball.

    ``delta`` is the largest float contraction factor; ``delta_up`` is a
    rational upper bound for it (exact when the squared bound is a perfect
    square, as for scalar and diagonal maps).  The ball center is the mean
    of the generator fixed points and the radius makes the ball invariant.
    """

    presentation: MonoidPresentation
    maps: tuple[AffineMap, ...]
    delta: float
    delta_sq_up: Fraction
    delta_up: Fraction
    center: ExactVec
    radius: Fraction

    @classmethod
    def build(cls, p: MonoidPresentation, maps: Sequence[AffineMap]) -> "IfsAction":
        maps = tuple(maps)
        if len(maps) != p.n:
            raise InputFormatError(
                f"need one map per generator: got {len(maps)} maps for {p.n} generators"
            )
        dims = {m.dimension for m in maps}
        if len(dims) != 1:
            raise InputFormatError("all maps must share one dimension")
        delta = max(m.lipschitz for m in maps)
        delta_sq_up = max(m.lipschitz_sq_bound for m in maps)
        delta_up = fraction_sqrt(delta_sq_up) or fraction_sqrt_upper(delta_sq_up)
        d = maps[0].dimension
        fixed = [m.fixed_point() for m in maps]
        center = tuple(sum(fp[j] for fp in fixed) / len(fixed) for j in range(d))
        if delta_up < 1:
            disp_sq = Fraction(0)
            for m in maps:
                img = m.apply_exact(center)
                dsq = sum((img[j] - center[j]) ** 2 for j in range(d))
                disp_sq = max(disp_sq, dsq)
            radius = fraction_sqrt_upper(disp_sq) / (1 - delta_up)
        else:
            radius = Fraction(0)
        return cls(p, maps, delta, delta_sq_up, delta_up, center, radius)

    @property
    def dimension(self) -> int:
        return self.maps[0].dimension

    @property
    def diameter(self) -> Fraction:
        return 2 * self.radius

    @cached_property
    def center_f(self) -> np.ndarray:
        return np.array([float(c) for c in self.center])

    def ball_box(self) -> tuple[ExactVec, ExactVec]:
        lo = tuple(c - self.radius for c in self.center)
        hi = tuple(c + self.radius for c in self.center)
        return lo, hi

    def effective_radius(self, x: np.ndarray) -> float:
        """Radius of the smallest stored-center ball that is invariant and
        contains x.  Any radius >= the stored one keeps invariance, since the
        stored radius already dominates max displacement / (1 - delta)."""
        return max(float(self.radius), float(np.linalg.norm(x - self.center_f)))

    def contraction_bound(self, k: int) -> float:
        """Float upper bound on the Lipschitz constant of any depth-k composite."""
        return float(self.delta_up) ** k


@dataclass(frozen=True)
class ActionReport:
    ok: bool
    delta: float
    diameter: float
    failures: tuple[str, ...]


def validate_action(a: IfsAction) -> ActionReport:
    """Check contraction per generator and exact relation compatibility for
    every commuting pair (matrix identities within RELATION_TOLERANCE)."""
    p = a.presentation
    failures: list[str] = []
    for g, m in enumerate(a.maps):
        if not m.lipschitz < 1:
            failures.append(
                f"generator '{p.generators[g]}' is not contracting: "
                f"lipschitz {m.lipschitz:.6g} >= 1"
            )
    if not failures and a.delta_up >= 1:
        failures.append(
            "contraction cannot be certified: the rational bound on the "
            "largest contraction factor is not below 1"
        )
    for i, j in sorted(p.commute_pairs):
        mi, mj = a.maps[i], a.maps[j]
        comm = mi.matrix_f @ mj.matrix_f - mj.matrix_f @ mi.matrix_f
        trans = (mi.matrix_f @ mj.translation_f + mi.translation_f) - (
            mj.matrix_f @ mi.translation_f + mj.translation_f
        )
        if np.abs(comm).max() > RELATION_TOLERANCE or np.abs(trans).max() > RELATION_TOLERANCE:
            failures.append(
                f"maps for commuting pair '{p.generators[i]}', '{p.generators[j]}' "
                f"do not commute as affine maps"
            )
    return ActionReport(
        ok=not failures,
        delta=a.delta,
        diameter=float(a.diameter),
        failures=tuple(failures),
    )


def require_valid(a: IfsAction) -> None:
    report = validate_action(a)
    if not report.ok:
        raise InputFormatError("invalid action: " + "; ".join(report.failures))


# -- parsing -------------------------------------------------------------------


def parse_ifs_text(p: MonoidPresentation, text: str) -> IfsAction:
    """Parse the IFS file format.

    ``dim: d`` header, then one ``map <generator>: a11 ... add b1 ... bd``
    line per generator (row-major matrix, then translation).  Numbers may be
    decimals or fractions like 1/3 and are kept exact.
    """
    dim: int | None = None
    maps: dict[int, AffineMap] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise InputFormatError(f"line {lineno}: expected 'key: values', got {raw!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        if key == "dim":
            if dim is not None:
                raise InputFormatError(f"line {lineno}: duplicate 'dim' header")
            try:
                dim = int(rest.strip())
            except ValueError:
                raise InputFormatError(f"line {lineno}: bad dimension {rest.strip()!r}") from None
            if dim < 1:
                raise InputFormatError(f"line {lineno}: dimension must be positive")
        elif key.startswith("map"):
            if dim is None:
                raise InputFormatError(f"line {lineno}: 'dim' must come before maps")
            name = key[len("map"):].strip()
            if name not in p.generators:
                raise InputFormatError(f"line {lineno}: unknown generator {name!r}")
            g = p.generators.index(name)
            if g in maps:
                raise InputFormatError(f"line {lineno}: duplicate map for {name!r}")
            tokens = rest.split()
            if len(tokens) != dim * dim + dim:
                raise InputFormatError(
                    f"line {lineno}: expected {dim * dim + dim} numbers, got {len(tokens)}"
                )
            try:
                nums = [Fraction(tok) for tok in tokens]
            except (ValueError, ZeroDivisionError):
                raise InputFormatError(f"line {lineno}: unreadable number") from None
            matrix = tuple(
                tuple(nums[i * dim + j] for j in range(dim)) for i in range(dim)
            )
            translation = tuple(nums[dim * dim:])
            maps[g] = AffineMap(dim, matrix, translation)
        else:
            raise InputFormatError(f"line {lineno}: unknown key {key!r}")
    if dim is None:
        raise InputFormatError("IFS file lacks a 'dim' header")
    missing = [p.generators[g] for g in range(p.n) if g not in maps]
    if missing:
        raise InputFormatError(f"IFS file lacks maps for: {', '.join(missing)}")
    return IfsAction.build(p, [maps[g] for g in range(p.n)])


def load_ifs(p: MonoidPresentation, path) -> IfsAction:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ifs_text(p, fh.read())


# -- attractor clouds ----------------------------------------------------------


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray  # (m, d), unique rows, lexicographically sorted
    depth: int


def attractor_points(
    a: IfsAction,
    k: int,
    seed: Sequence[float] | np.ndarray,
    max_points: int = DEFAULT_MAX_POINTS,
) -> PointCloud:
    """Images of the seed under all depth-k elements.

    Computed by iterating the union-of-images step with exact-duplicate
    pruning (sound: equal points have equal futures), which agrees with
    composing along every sphere element.
    """
    require_valid(a)
    x = np.asarray(seed, dtype=float).reshape(a.dimension)
    pts = x[None, :]
    for level in range(k):
        if pts.shape[0] * a.presentation.n > max_points:
            raise CapacityError(
                f"point cloud would exceed {max_points} points at depth {level + 1}",
                depth_reached=level,
            )
        pts = np.vstack([m.apply_points(pts) for m in a.maps])
        pts = np.unique(pts, axis=0)
    return PointCloud(np.unique(pts, axis=0), k)


def hausdorff_distance(cloud_a: np.ndarray, cloud_b: np.ndarray) -> float:
    from scipy.spatial import cKDTree

    ta = cKDTree(cloud_a)
    tb = cKDTree(cloud_b)
    d_ab = tb.query(cloud_a)[0].max()
    d_ba = ta.query(cloud_b)[0].max()
    return float(max(d_ab, d_ba))


def kappa(
    a: IfsAction, f: BoundaryWord, x: Sequence[float], k: int
) -> tuple[np.ndarray, float]:
    """Depth-k image of the seed along the boundary word, with the certified
    bound (contraction bound)^k * diameter on the distance to the limit."""
    require_valid(a)
    if k < 1:
        raise InputFormatError("kappa needs depth >= 1")
    if f.presentation != a.presentation:
        raise InputFormatError("boundary word and action use different presentations")
    pt = np.asarray(x, dtype=float).reshape(a.dimension)
    diam = 2.0 * a.effective_radius(pt)
    stage = prefix_element(f, k)
    for g in reversed(stage.word):
        pt = a.maps[g].matrix_f @ pt + a.maps[g].translation_f
    bound = a.contraction_bound(k) * diam
    return pt, bound


def kappa_basepoint_independence(
    a: IfsAction, f: BoundaryWord, x: Sequence[float], y: Sequence[float], k: int
) -> float:
    """Distance between the depth-k images from two base points; bounded by
    (contraction bound)^k times the base-point distance."""
    px, _ = kappa(a, f, x, k)
    py, _ = kappa(a, f, y, k)
    return float(np.linalg.norm(px - py))


# -- contact measure -----------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box split into resolution^d congruent cells."""

    lo: ExactVec
    hi: ExactVec
    resolution: int

    def __post_init__(self):
        if self.resolution < 1:
            raise InputFormatError("grid resolution must be at least 1")
        if len(self.lo) != len(self.hi):
            raise InputFormatError("grid bounds must share a dimension")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise InputFormatError("grid box must have positive extent")

    @classmethod
    def for_action(cls, a: IfsAction, resolution: int) -> "GridSpec":
        lo, hi = a.ball_box()
        return cls(lo, hi, resolution)

    @property
    def dim(self) -> int:
        return len(self.lo)

    def cell_count(self) -> int:
        return self.resolution ** self.dim

    def steps(self) -> ExactVec:
        return tuple(
            (h - l) / self.resolution for l, h in zip(self.lo, self.hi)
        )

    def cell_bounds(self, flat: int) -> tuple[ExactVec, ExactVec]:
        idx = []
        rem = flat
        for _ in range(self.dim):
            idx.append(rem % self.resolution)
            rem //= self.resolution
        idx.reverse()  # C order: first axis slowest
        h = self.steps()
        lo = tuple(self.lo[j] + idx[j] * h[j] for j in range(self.dim))
        hi = tuple(self.lo[j] + (idx[j] + 1) * h[j] for j in range(self.dim))
        return lo, hi

    def flat_index(self, idx: Sequence[int]) -> int:
        flat = 0
        for j in range(self.dim):
            flat = flat * self.resolution + idx[j]
        return flat

    def point_cell(self, z: ExactVec) -> int:
        """Half-open cell membership with the last cell closed, per axis."""
        h = self.steps()
        idx = []
        for j in range(self.dim):
            i = int((z[j] - self.lo[j]) / h[j])
            idx.append(min(max(i, 0), self.resolution - 1))
        return self.flat_index(idx)


@dataclass(frozen=True)
class DensityGrid:
    """Per-cell mass intervals for the pushforward measure on the attractor.

    Contract: lower(cell) <= measure(cell closure) and
    measure(cell interior) <= upper(cell); the totals satisfy
    sum(lower) <= 1 <= sum(upper).
    """

    spec: GridSpec
    depth: int
    lower: tuple[Fraction, ...]
    upper: tuple[Fraction, ...]

    def __post_init__(self):
        if sum(self.lower) > 1 or sum(self.upper) < 1:
            raise InputFormatError("density grid mass totals violate the sandwich")

    def midpoints(self) -> np.ndarray:
        mid = [(lo + up) / 2 for lo, up in zip(self.lower, self.upper)]
        arr = np.array([float(m) for m in mid])
        return arr.reshape((self.spec.resolution,) * self.spec.dim)


def _le_with_radius(gap: Fraction, r_sq: Fraction) -> bool:
    """Whether radius <= gap, comparing squares (gap may be negative)."""
    return gap >= 0 and gap * gap >= r_sq


def contact_measure(
    a: IfsAction,
    x: Sequence[float] | None,
    k: int,
    grid: GridSpec,
    max_points: int = DEFAULT_MAX_POINTS,
    max_cells: int = DEFAULT_MAX_CELLS,
) -> DensityGrid:
    """Interval-valued pushforward of the depth-k word masses onto the grid.

    Every length-k free word carries mass n^-k.  Its whole cylinder maps into
    the image of the invariant ball, enclosed by the ball around the image of
    the ball center with radius (contraction bound)^k * R; the enclosure is
    independent of the base point argument (kept for signature compatibility)
    and tight enough to resolve touching cells exactly.  The grid box must
    cover the invariant ball.
    """
    require_valid(a)
    if grid.dim != a.dimension:
        raise InputFormatError("grid dimension does not match the action")
    lo_ball, hi_ball = a.ball_box()
    for j in range(grid.dim):
        if grid.lo[j] > lo_ball[j] or grid.hi[j] < hi_ball[j]:
            raise InputFormatError("grid box must contain the invariant ball")
    n = a.presentation.n
    if n ** k > max_points:
        raise CapacityError(f"free-word tree of size {n}^{k} exceeds {max_points}")
    if grid.cell_count() > max_cells:
        raise CapacityError(
            f"grid of {grid.resolution}^{grid.dim} cells exceeds {max_cells}"
        )
    # exact leaf centers: images of the ball center under all length-k words
    leaves: list[ExactVec] = [a.center]
    for _ in range(k):
        leaves = [m.apply_exact(z) for m in a.maps for z in leaves]
    mass = Fraction(1, n ** k)
    r_sq = a.delta_sq_up ** k * a.radius ** 2
    r_up = fraction_sqrt_upper(r_sq)
    res = grid.resolution
    steps = grid.steps()
    lower = [Fraction(0)] * grid.cell_count()
    upper = [Fraction(0)] * grid.cell_count()
    for z in leaves:
        if r_sq == 0:
            cell = grid.point_cell(z)
            lower[cell] += mass
            upper[cell] += mass
            continue
        ranges = []
        for j in range(grid.dim):
            lo_i = int((z[j] - r_up - grid.lo[j]) / steps[j])
            hi_i = int((z[j] + r_up - grid.lo[j]) / steps[j])
            ranges.append(range(max(lo_i - 1, 0), min(hi_i + 1, res - 1) + 1))
        candidates: list[list[int]] = [[]]
        for rg in ranges:
            candidates = [c + [i] for c in candidates for i in rg]
        contained_done = False
        for idx in candidates:
            cell_lo = tuple(grid.lo[j] + idx[j] * steps[j] for j in range(grid.dim))
            cell_hi = tuple(grid.lo[j] + (idx[j] + 1) * steps[j] for j in range(grid.dim))
            # squared distance from the center to the closed cell
            dist_sq = Fraction(0)
            for j in range(grid.dim):
                if z[j] < cell_lo[j]:
                    dist_sq += (cell_lo[j] - z[j]) ** 2
                elif z[j] > cell_hi[j]:
                    dist_sq += (z[j] - cell_hi[j]) ** 2
            flat = grid.flat_index(idx)
            if dist_sq < r_sq:
                upper[flat] += mass
            if not contained_done:
                inside = True
                for j in range(grid.dim):
                    hi_ok = grid.hi[j] <= cell_hi[j] or _le_with_radius(
                        cell_hi[j] - z[j], r_sq
                    )
                    lo_ok = grid.lo[j] >= cell_lo[j] or _le_with_radius(
                        z[j] - cell_lo[j], r_sq
                    )
                    if not (hi_ok and lo_ok):
                        inside = False
                        break
                if inside:
                    lower[flat] += mass
                    contained_done = True
    return DensityGrid(grid, k, tuple(lower), tuple(upper))


# -- norm checks and dimension estimates ----------------------------------------


def _word_tree_points(a: IfsAction, seed: np.ndarray, k: int, max_points: int) -> np.ndarray:
    """Float images of the seed under all n^k letter sequences (with multiplicity)."""
    n = a.presentation.n
    if n ** k > max_points:
        raise CapacityError(f"free-word tree of size {n}^{k} exceeds {max_points}")
    pts = seed[None, :]
    for _ in range(k):
        pts = np.vstack([m.apply_points(pts) for m in a.maps])
    return pts


def gamma_norm_check(
    a: IfsAction,
    x: Sequence[float],
    t: TraceElement,
    k: int,
    grid: GridSpec,
    max_points: int = DEFAULT_MAX_POINTS,
) -> float:
    """Largest ratio ||g o alpha_t|| / ||g|| over cell indicators g, against
    the empirical depth-k point masses.

    Exactly 1 for the identity element.  For a generator the ratio reaches
    sqrt(n) on cylinder indicators: pulling a cell back through one map
    collects the mass of the whole preimage cylinder, the same weight factor
    the literal composition operators drop.  Discretization adds slack on
    top of that."""
    require_valid(a)
    seed = np.asarray(x, dtype=float).reshape(a.dimension)
    pts = _word_tree_points(a, seed, k, max_points)
    imgs = pts.copy()
    for g in reversed(t.word):
        imgs = a.maps[g].apply_points(imgs)
    lo = np.array([float(v) for v in grid.lo])
    step = np.array([float(s) for s in grid.steps()])
    res = grid.resolution

    def cell_counts(points: np.ndarray) -> np.ndarray:
        idx = np.floor((points - lo) / step).astype(np.int64)
        np.clip(idx, 0, res - 1, out=idx)
        flat = np.zeros(points.shape[0], dtype=np.int64)
        for j in range(grid.dim):
            flat = flat * res + idx[:, j]
        return np.bincount(flat, minlength=grid.cell_count())

    base = cell_counts(pts)
    moved = cell_counts(imgs)
    ratios = np.sqrt(moved[base > 0] / base[base > 0])
    return float(ratios.max()) if ratios.size else 0.0


def box_counting_dimension(
    points: np.ndarray, exponents: Sequence[int] = tuple(range(4, 10))
) -> tuple[float, list[tuple[int, int]]]:
    """Least-squares slope of log(occupied boxes) vs log(1/box size) over
    dyadic box sizes extent / 2^j."""
    lo = points.min(axis=0)
    extent = float((points.max(axis=0) - lo).max())
    if extent <= 0:
        raise InputFormatError("point cloud is degenerate")
    table: list[tuple[int, int]] = []
    for j in exponents:
        h = extent / (1 << j)
        idx = np.floor((points - lo) / h).astype(np.int64)
        np.clip(idx, 0, (1 << j) - 1, out=idx)
        occupied = len(np.unique(idx, axis=0))
        table.append((j, occupied))
    xs = np.array([j * np.log(2.0) for j, _ in table])
    ys = np.array([np.log(c) for _, c in table])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, table
