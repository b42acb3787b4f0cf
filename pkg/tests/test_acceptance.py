"""Acceptance gate: one test per criterion, each at its stated tolerance,
printing one PASS/FAIL line (run with -s to see them inline).

Presentations are constructed fresh inside timed criteria so cached spheres
from other tests cannot flatter the runtime limits.
"""

import io
import time
from contextlib import contextmanager, redirect_stderr
from fractions import Fraction
from itertools import product

import numpy as np

from monoboundary import (
    BoundaryWord,
    ChainOperator,
    MonoidPresentation,
    adjoint_S,
    adjoint_T,
    approx_equiv,
    attractor_points,
    box_counting_dimension,
    canonical_hom,
    contact_measure,
    free_cylinder_measure,
    GridSpec,
    hausdorff_distance,
    iso_S,
    kappa,
    kappa_basepoint_independence,
    leq_bounded,
    monoid_cylinder_measure,
    op_T,
    operator_norm,
    parse_ifs_text,
    product_growth_check,
    range_projection,
    relation_defects,
    sphere,
    UGraph,
)
from monoboundary.cli import main as cli_main
from monoboundary.operators import projection_mass

from oracles import (
    C4_TEXT,
    CANTOR_IFS,
    F2_TEXT,
    F3_TEXT,
    N2_TEXT,
    SIERPINSKI_IFS,
    XZ_TEXT,
    all_free_words,
    swap_closure,
)

FLOAT_SLACK = 1e-12  # accumulated float rounding of map compositions


@contextmanager
def criterion(num: int, description: str):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {num}: FAIL - {description}")
        raise
    print(f"ACCEPTANCE {num}: PASS - {description}")


def fresh(text: str) -> MonoidPresentation:
    return MonoidPresentation.from_text(text)


def test_criterion_01_free_cylinder_measure():
    with criterion(1, "free cylinder masses are n^-|v| exactly, under 1 s"):
        start = time.perf_counter()
        for n, text in ((2, F2_TEXT), (3, F3_TEXT)):
            p = fresh(text)
            for length in range(7):
                for w in all_free_words(n, length):
                    tau = canonical_hom(p, w)
                    cm = monoid_cylinder_measure(p, tau, length)
                    assert cm.lower_bound == Fraction(1, n ** length)
                    assert cm.lower_bound == free_cylinder_measure(n, w)
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f}s"


def test_criterion_02_free_isometry_relations():
    with criterion(2, "free-monoid delta and completeness exact at depth 6, under 10 s"):
        start = time.perf_counter()
        for text in (F2_TEXT, F3_TEXT):
            p = fresh(text)
            depth = 6
            S = [iso_S(p, x, depth) for x in range(p.n)]
            St = [adjoint_S(p, x, depth) for x in range(p.n)]
            id_prev = ChainOperator.identity(S[0].source)
            for x in range(p.n):
                for y in range(p.n):
                    prod = St[x].compose(S[y])
                    defect = prod - id_prev if x == y else prod
                    assert operator_norm(defect) <= 1e-12
                    assert defect.hs_defect_sq() == 0
            total = S[0].compose(St[0])
            for x in range(1, p.n):
                total = total + S[x].compose(St[x])
            defect = total - ChainOperator.identity(total.source)
            assert operator_norm(defect) <= 1e-12
            assert defect.hs_defect_sq() == 0
        elapsed = time.perf_counter() - start
        assert elapsed < 10.0, f"took {elapsed:.2f}s"


def test_criterion_03_normalization_gap():
    with criterion(3, "literal T model fails the delta relation by >= 0.4 at depth 3"):
        p = fresh(F2_TEXT)
        t = op_T(p, p.element("x"), 3)
        defect = adjoint_T(p, p.element("x"), 3).compose(t) - ChainOperator.identity(
            t.source
        )
        assert operator_norm(defect) >= 0.4
        reports = {r.label: r for r in relation_defects(p, 3)}
        assert reports["T:delta:x|x"].norm_defect >= 0.4


def test_criterion_04_crisp_laca_decay():
    with criterion(4, "square-graph projection mass is exactly 2^-K, relations exact at 6"):
        p = fresh(C4_TEXT)
        v1 = (0, 2)  # generators a, c
        for depth in range(4, 11):
            mass = projection_mass(range_projection(p, v1, depth))
            # counting oracle: words over {b, d} only, each its own fiber
            count = 0
            seen = set()
            for w in product((1, 3), repeat=depth):
                u = canonical_hom(p, w)
                assert not set(u.word) & {0, 2}
                seen.add(u)
                count += 1
            assert len(seen) == count  # pairwise distinct normal forms
            assert mass == Fraction(count, 4 ** depth) == Fraction(1, 2 ** depth)
        rows = relation_defects(p, 6)
        for row in rows:
            if row.label.startswith(
                ("S:isometry", "S:commutation", "S:adjoint-commutation", "S:orthogonality")
            ):
                assert row.norm_defect <= 1e-12
                assert row.hs_defect_sq == 0


def test_criterion_05_n2_saturation():
    with criterion(5, "free-commutative cylinder count saturates to 1023/1024"):
        p = fresh(N2_TEXT)
        x = p.element("x")
        cm = monoid_cylinder_measure(p, x, 10)
        assert cm.count == 1023
        assert cm.lower_bound == Fraction(1023, 1024)
        previous = Fraction(0)
        for k in range(1, 11):
            bound = monoid_cylinder_measure(p, x, k).lower_bound
            assert bound >= previous
            previous = bound


def test_criterion_06_product_growth():
    with criterion(6, "square-graph growth is (k+1)2^k and factors convolve"):
        p = fresh(C4_TEXT)
        graph = UGraph.from_presentation(p)
        for k in range(9):
            assert len(sphere(p, k)) == (k + 1) * 2 ** k
        assert product_growth_check(graph, 8)
        xz = fresh(XZ_TEXT)
        brute = {min(swap_closure(xz, w)) for w in all_free_words(3, 2)}
        assert len(sphere(xz, 2)) == len(brute) == 8


def test_criterion_07_boundary_order():
    with criterion(7, "boundary order certificates and finite character separation"):
        xz = fresh(XZ_TEXT)
        left = BoundaryWord.parse(xz, "(xz)^inf")
        r1 = leq_bounded(left, BoundaryWord.parse(xz, "x^inf"), 5)
        r2 = leq_bounded(left, BoundaryWord.parse(xz, "z^inf"), 5)
        assert r1.is_true and "periodic" in r1.certificate
        assert r2.is_true and "periodic" in r2.certificate
        f2 = fresh(F2_TEXT)
        r3 = approx_equiv(
            BoundaryWord.parse(f2, "x^inf"), BoundaryWord.parse(f2, "y^inf"), 5
        )
        assert r3.is_false and "letter-count" in r3.certificate

        # finite separation: inequivalent points differ on a short ideal
        from monoboundary import Character, char_eval, prefix_element

        words = []
        for total in range(1, 4):
            for per_len in range(1, total + 1):
                for pre in product(range(2), repeat=total - per_len):
                    for per in product(range(2), repeat=per_len):
                        words.append(BoundaryWord(f2, pre, per))
        for i, u in enumerate(words):
            for v in words[i + 1:]:
                if not approx_equiv(u, v, 8).is_false:
                    continue
                cu, cv = Character(u), Character(v)
                separated = any(
                    char_eval(cu, prefix_element(stream, k))
                    != char_eval(cv, prefix_element(stream, k))
                    for k in range(1, 9)
                    for stream in (u, v)
                )
                assert separated, f"no separator for {u} vs {v}"


def test_criterion_08_fractal_bounds():
    with criterion(8, "contact interval exact, cloud Cauchy bounds, box dimension"):
        start = time.perf_counter()
        f2 = fresh(F2_TEXT)
        cantor = parse_ifs_text(f2, CANTOR_IFS)
        density = contact_measure(cantor, [0.0], 12, GridSpec.for_action(cantor, 3))
        assert density.lower[0] == density.upper[0] == Fraction(1, 2)

        f3 = fresh(F3_TEXT)
        sier = parse_ifs_text(f3, SIERPINSKI_IFS)
        seed = [1 / 3, 1 / 3]
        clouds = {k: attractor_points(sier, k, seed).points for k in range(4, 12)}
        diam = float(sier.diameter)
        for k in range(4, 11):
            dist = hausdorff_distance(clouds[k], clouds[k + 1])
            assert dist <= 2.0 ** -k * diam + FLOAT_SLACK
        dim, _ = box_counting_dimension(clouds[11], range(4, 10))
        assert abs(dim - 1.585) <= 0.05
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0, f"took {elapsed:.2f}s"


def test_criterion_09_kappa_certification():
    with criterion(9, "random boundary words honor the depth-10 certificates"):
        import random

        f3 = fresh(F3_TEXT)
        sier = parse_ifs_text(f3, SIERPINSKI_IFS)
        rng = random.Random(2024)
        base = [1 / 3, 1 / 3]
        other = [0.1, 0.2]
        base_gap = float(np.linalg.norm(np.array(base) - np.array(other)))
        for _ in range(100):
            pre_len = rng.randrange(0, 4)
            per_len = rng.randrange(1, 5)
            word = BoundaryWord(
                f3,
                tuple(rng.randrange(3) for _ in range(pre_len)),
                tuple(rng.randrange(3) for _ in range(per_len)),
            )
            p10, bound10 = kappa(sier, word, base, 10)
            p15, _ = kappa(sier, word, base, 15)
            assert float(np.linalg.norm(p15 - p10)) <= bound10
            gap = kappa_basepoint_independence(sier, word, base, other, 10)
            assert gap <= sier.contraction_bound(10) * base_gap + FLOAT_SLACK


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, "acceptance CLI commands are byte-identical across runs"):
        paths = {}
        for name, text in [
            ("f2", F2_TEXT), ("f3", F3_TEXT), ("n2", N2_TEXT),
            ("xz", XZ_TEXT), ("c4", C4_TEXT),
        ]:
            path = tmp_path / f"{name}.txt"
            path.write_text(text)
            paths[name] = str(path)
        for name, text in [("cantor", CANTOR_IFS), ("sier", SIERPINSKI_IFS)]:
            path = tmp_path / f"{name}.ifs"
            path.write_text(text)
            paths[name] = str(path)
        pgm_a, pgm_b = str(tmp_path / "a.pgm"), str(tmp_path / "b.pgm")
        commands = [
            ["presentation", "-p", paths["c4"], "--depth", "8"],
            ["decompose", "-p", paths["c4"]],
            ["measure", "-p", paths["n2"], "--element", "x", "--depth", "10"],
            ["defects", "-p", paths["f2"], "--depth", "6"],
            ["defects", "-p", paths["f3"], "--depth", "6"],
            [
                "boundary-leq", "-p", paths["xz"],
                "--left", "(xz)^inf", "--right", "x^inf", "--horizon", "5",
            ],
            [
                "fractal-render", "-p", paths["f2"], "--ifs", paths["cantor"],
                "--depth", "12", "--grid", "3", "--seed", "0", "--out", "{pgm}",
            ],
            [
                "attractor", "-p", paths["f3"], "--ifs", paths["sier"],
                "--depth", "6", "--seed", "0.25,0.25",
            ],
        ]
        for template in commands:
            captures = []
            for pgm_path in (pgm_a, pgm_b):
                argv = [tok.format(pgm=pgm_path) for tok in template]
                out = io.StringIO()
                err = io.StringIO()
                with redirect_stderr(err):
                    code = cli_main(argv, out=out)
                assert code == 0, f"{argv} exited {code}: {err.getvalue()}"
                captures.append((out.getvalue(), err.getvalue()))
            assert captures[0] == captures[1], f"nondeterministic output for {template}"
        with open(pgm_a, "rb") as fa, open(pgm_b, "rb") as fb:
            assert fa.read() == fb.read()
