"""Command-line interface.

One executable, deterministic text output: identical inputs give
byte-identical outputs (fixed orderings, floats printed to 12 significant
digits, fixed seeds).  Exact rationals are printed as integers or p/q
tokens, never as floats.  Exit codes: 0 success, 1 usage error, 2 input
format error, 3 capacity error.  Environment variables are not consulted.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from .boundary import BoundaryWord, leq_bounded
from .core import (
    DEFAULT_MAX_SPHERE,
    MonoidPresentation,
    sphere,
)
from .errors import CapacityError, InputFormatError
from .fractal import (
    DEFAULT_MAX_CELLS,
    DEFAULT_MAX_POINTS,
    GridSpec,
    attractor_points,
    contact_measure,
    load_ifs,
)
from .graphs import UGraph, coconnected_components, crisp_laca_applicable
from .measure import monoid_cylinder_measure
from .operators import relation_defects

USAGE_EXIT = 1
INPUT_EXIT = 2
CAPACITY_EXIT = 3


def fmt_float(x: float) -> str:
    return f"{x:.12g}"


def fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class _Parser(argparse.ArgumentParser):
    """argparse variant that exits 1 on usage errors (argparse default is 2)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="monoboundary",
        description=(
            "Finite-depth boundary computations for commutation monoids: "
            "sphere growth, coconnected decomposition, cylinder measures, "
            "operator relation defects, boundary order, and contracting-action "
            "fractals with contact measures."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_presentation_arg(sp):
        sp.add_argument(
            "-p", "--presentation", required=True, metavar="FILE",
            help="presentation file (generators: ... / commute: ... lines)",
        )

    sp = sub.add_parser("presentation", help="sphere sizes up to a depth (CSV)")
    add_presentation_arg(sp)
    sp.add_argument("--depth", type=int, required=True, help="largest depth to report")
    sp.add_argument("--max-sphere", type=int, default=DEFAULT_MAX_SPHERE)
    sp.add_argument("--figure", metavar="PNG", help="also save a growth plot")

    sp = sub.add_parser("decompose", help="coconnected components and the relation-set test")
    add_presentation_arg(sp)

    sp = sub.add_parser("measure", help="exact cylinder counts (CSV)")
    add_presentation_arg(sp)
    sp.add_argument("--element", required=True, help="target element, e.g. xz")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--max-sphere", type=int, default=DEFAULT_MAX_SPHERE)

    sp = sub.add_parser(
        "defects",
        help="operator relation defects (CSV)",
        description=(
            "One row per relation check. hs_defect_num/hs_defect_den give the "
            "squared weighted Hilbert-Schmidt defect as an exact rational; "
            "exceptional_mass is the weighted support mass of a range "
            "projection (zero for other rows)."
        ),
    )
    add_presentation_arg(sp)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--max-sphere", type=int, default=DEFAULT_MAX_SPHERE)

    sp = sub.add_parser("boundary-leq", help="bounded-horizon boundary order")
    add_presentation_arg(sp)
    sp.add_argument("--left", required=True, help='boundary word, e.g. "(xz)^inf"')
    sp.add_argument("--right", required=True, help='boundary word, e.g. "x^inf"')
    sp.add_argument("--horizon", type=int, default=8)

    sp = sub.add_parser("attractor", help="depth-k attractor points (CSV)")
    add_presentation_arg(sp)
    sp.add_argument("--ifs", required=True, metavar="FILE", help="IFS map file")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--seed", required=True, help="comma-separated base point, e.g. 0,0")
    sp.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)
    sp.add_argument("--figure", metavar="PNG", help="also save a scatter plot")

    sp = sub.add_parser("fractal-render", help="contact-measure grid to PGM/CSV/figure")
    add_presentation_arg(sp)
    sp.add_argument("--ifs", required=True, metavar="FILE")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--grid", type=int, required=True, help="cells per axis")
    sp.add_argument("--seed", default=None, help="base point (default: ball center)")
    sp.add_argument("--bbox", default=None, help="box as lo,hi per axis joined by ';'")
    sp.add_argument("--out", required=True, metavar="PGM", help="output PGM path")
    sp.add_argument("--csv", metavar="CSV", help="also write cell bounds and intervals")
    sp.add_argument("--figure", metavar="PNG", help="also save a heatmap figure")
    sp.add_argument("--max-points", type=int, default=DEFAULT_MAX_POINTS)
    sp.add_argument("--max-cells", type=int, default=DEFAULT_MAX_CELLS)
    return parser


def _load_presentation(path: str) -> MonoidPresentation:
    try:
        return MonoidPresentation.from_file(path)
    except OSError as exc:
        raise InputFormatError(f"cannot read presentation file: {exc}") from None


def _parse_point(text: str, dim: int) -> tuple[Fraction, ...]:
    parts = [tok.strip() for tok in text.split(",")]
    if len(parts) != dim:
        raise InputFormatError(f"point needs {dim} coordinates, got {len(parts)}")
    try:
        return tuple(Fraction(tok) for tok in parts)
    except (ValueError, ZeroDivisionError):
        raise InputFormatError(f"unreadable point {text!r}") from None


def _cmd_presentation(args, out) -> int:
    p = _load_presentation(args.presentation)
    if args.depth < 0:
        raise InputFormatError("depth must be non-negative")
    sizes = [len(sphere(p, k, max_size=args.max_sphere)) for k in range(args.depth + 1)]
    out.write("depth,size\n")
    for k, size in enumerate(sizes):
        out.write(f"{k},{size}\n")
    if args.figure:
        from .render import save_growth_figure

        save_growth_figure(range(args.depth + 1), sizes, args.figure)
    return 0


def _cmd_decompose(args, out) -> int:
    p = _load_presentation(args.presentation)
    g = UGraph.from_presentation(p)
    comps = coconnected_components(g)
    for i, comp in enumerate(comps, start=1):
        edges = ",".join(
            f"{comp.vertices[a]}-{comp.vertices[b]}" for a, b in sorted(comp.edges)
        )
        out.write(
            f"component {i}: vertices={','.join(comp.vertices)} edges={edges}\n"
        )
    verdict = "applicable" if crisp_laca_applicable(g) else "not applicable"
    out.write(f"crisp-laca: {verdict}\n")
    return 0


def _cmd_measure(args, out) -> int:
    p = _load_presentation(args.presentation)
    tau = p.element(args.element)
    if args.depth < tau.length:
        raise InputFormatError(
            f"depth {args.depth} is smaller than the element length {tau.length}"
        )
    out.write("tau,depth,count,denominator,lower_bound\n")
    for k in range(tau.length, args.depth + 1):
        cm = monoid_cylinder_measure(p, tau, k, max_size=args.max_sphere)
        out.write(
            f"{p.word_str(tau)},{k},{cm.count},{p.n ** k},{fmt_fraction(cm.lower_bound)}\n"
        )
    if not p.is_free:
        sys.stderr.write(
            "note: lower bounds only; values are not certified stabilized for "
            "presentations with relations\n"
        )
    return 0


def _cmd_defects(args, out) -> int:
    p = _load_presentation(args.presentation)
    out.write("label,norm_defect,hs_defect_num,hs_defect_den,exceptional_mass\n")
    for rep in relation_defects(p, args.depth, max_size=args.max_sphere):
        out.write(
            f"{rep.label},{fmt_float(rep.norm_defect)},"
            f"{rep.hs_defect_sq.numerator},{rep.hs_defect_sq.denominator},"
            f"{fmt_fraction(rep.exceptional_mass)}\n"
        )
    return 0


def _cmd_boundary_leq(args, out) -> int:
    p = _load_presentation(args.presentation)
    left = BoundaryWord.parse(p, args.left)
    right = BoundaryWord.parse(p, args.right)
    result = leq_bounded(left, right, args.horizon)
    if result.is_true:
        out.write("TRUE\n")
    elif result.is_false:
        out.write("FALSE\n")
    else:
        out.write("UNKNOWN\n")
    out.write(f"certificate: {result.certificate}\n")
    return 0


def _cmd_attractor(args, out) -> int:
    p = _load_presentation(args.presentation)
    action = load_ifs(p, args.ifs)
    seed = _parse_point(args.seed, action.dimension)
    cloud = attractor_points(
        action, args.depth, [float(c) for c in seed], max_points=args.max_points
    )
    out.write(",".join(f"x{j}" for j in range(action.dimension)) + "\n")
    for row in cloud.points:
        out.write(",".join(fmt_float(v) for v in row) + "\n")
    if args.figure:
        from .render import save_attractor_figure

        save_attractor_figure(cloud, args.figure)
    return 0


def _parse_bbox(text: str, dim: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...]]:
    axes = [seg.strip() for seg in text.split(";")]
    if len(axes) != dim:
        raise InputFormatError(f"bbox needs {dim} axis ranges, got {len(axes)}")
    lo: list[Fraction] = []
    hi: list[Fraction] = []
    for seg in axes:
        parts = seg.split(",")
        if len(parts) != 2:
            raise InputFormatError(f"bbox axis {seg!r} is not 'lo,hi'")
        try:
            lo.append(Fraction(parts[0].strip()))
            hi.append(Fraction(parts[1].strip()))
        except (ValueError, ZeroDivisionError):
            raise InputFormatError(f"unreadable bbox segment {seg!r}") from None
    return tuple(lo), tuple(hi)


def _cmd_fractal_render(args, out) -> int:
    p = _load_presentation(args.presentation)
    action = load_ifs(p, args.ifs)
    if args.bbox:
        lo, hi = _parse_bbox(args.bbox, action.dimension)
        grid = GridSpec(lo, hi, args.grid)
    else:
        grid = GridSpec.for_action(action, args.grid)
    seed = (
        _parse_point(args.seed, action.dimension) if args.seed else action.center
    )
    density = contact_measure(
        action,
        [float(c) for c in seed],
        args.depth,
        grid,
        max_points=args.max_points,
        max_cells=args.max_cells,
    )
    from .render import grid_to_image, write_pgm

    write_pgm(args.out, grid_to_image(density))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            bounds_header = ",".join(
                f"lo{j},hi{j}" for j in range(grid.dim)
            )
            fh.write(f"cell,{bounds_header},lower,upper\n")
            for flat in range(grid.cell_count()):
                lo, hi = grid.cell_bounds(flat)
                bounds = ",".join(
                    f"{fmt_fraction(lo[j])},{fmt_fraction(hi[j])}" for j in range(grid.dim)
                )
                fh.write(
                    f"{flat},{bounds},{fmt_fraction(density.lower[flat])},"
                    f"{fmt_fraction(density.upper[flat])}\n"
                )
    if args.figure:
        from .render import save_density_figure

        save_density_figure(density, args.figure)
    return 0


_COMMANDS = {
    "presentation": _cmd_presentation,
    "decompose": _cmd_decompose,
    "measure": _cmd_measure,
    "defects": _cmd_defects,
    "boundary-leq": _cmd_boundary_leq,
    "attractor": _cmd_attractor,
    "fractal-render": _cmd_fractal_render,
}


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse --help exits 0; usage errors exit via _Parser.error with 1
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except InputFormatError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return INPUT_EXIT
    except CapacityError as exc:
        sys.stderr.write(f"capacity: {exc}\n")
        return CAPACITY_EXIT


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
