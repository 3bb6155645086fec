"""Gotay models, exact pencil inversion, symplectic-to-Poisson conversion."""

from fractions import Fraction

import pytest

from conftest import rng_for
from coisokit import (
    AffinePencil,
    DegenerateBivectorError,
    DifferentialForm,
    MultiVectorField,
    NonAffineFibreError,
    PencilError,
    PresymplecticData,
    PresymplecticError,
    RingElement,
    Scalar,
    SubbundleSpec,
    de_rham_d,
    fibrewise_degree_classify,
    gotay_local_model,
    invert_affine_pencil,
    is_in_omega_le,
    make_chart,
    parse_pencil_text,
    pencil_product_defect,
    projection_P,
    pullback_zero_section,
    schouten_bracket,
    symplectic_to_poisson,
)
from coisokit._linalg import ring_det


def torus_base(names):
    return make_chart(" ".join(f"{n}*" for n in names))


class TestGotayModel:
    def test_zero_form_gives_cotangent_model(self):
        # omega_C = 0 on T^2 with F = TC: Omega is the canonical pairing
        base = torus_base(["q1", "q2"])
        data = PresymplecticData(
            base, DifferentialForm.zero(base, 2), SubbundleSpec(("q1", "q2"))
        )
        model = gotay_local_model(data)
        assert model.chart.fibre == ("p1", "p2")
        one = RingElement.one(model.chart)
        expected = DifferentialForm(model.chart, 2, (((0, 2), one), ((1, 3), one)))
        assert model.omega == expected

    def test_t4_model(self):
        base = torus_base(["y1", "y2", "q1", "q2"])
        omega_c = DifferentialForm(base, 2, (((0, 1), RingElement.one(base)),))
        data = PresymplecticData(base, omega_c, SubbundleSpec(("q1", "q2")))
        model = gotay_local_model(data)
        chart = model.chart
        assert chart.fibre == ("p1", "p2")
        one = RingElement.one(chart)
        expected = DifferentialForm(
            chart, 2, (((0, 1), one), ((2, 4), one), ((3, 5), one))
        )
        assert model.omega == expected

    def test_t3_model(self):
        base = torus_base(["y1", "y2", "q"])
        omega_c = DifferentialForm(base, 2, (((0, 1), RingElement.one(base)),))
        data = PresymplecticData(base, omega_c, SubbundleSpec(("q",)))
        model = gotay_local_model(data)
        assert model.chart.fibre == ("p",)
        one = RingElement.one(model.chart)
        expected = DifferentialForm(model.chart, 2, (((0, 1), one), ((2, 3), one)))
        assert model.omega == expected
        mat = model.omega.coefficient_matrix()
        assert not ring_det([[c for c in row] for row in mat]).is_zero()

    def test_postconditions(self):
        for names, kernel, coeff_dirs in (
            (["y1", "y2", "q1", "q2"], ("q1", "q2"), (0, 1)),
            (["y1", "y2", "q"], ("q",), (0, 1)),
        ):
            base = torus_base(names)
            omega_c = DifferentialForm(
                base, 2, ((coeff_dirs, RingElement.one(base)),)
            )
            data = PresymplecticData(base, omega_c, SubbundleSpec(kernel))
            model = gotay_local_model(data)
            assert pullback_zero_section(model.omega) == omega_c
            assert fibrewise_degree_classify(model.omega) <= {0, 1}

    def test_non_closed_form_rejected(self):
        base = torus_base(["y1", "y2", "q"])
        omega_c = DifferentialForm(
            base, 2, (((0, 1), RingElement.sin_of(base, {"q": 1})),)
        )
        with pytest.raises(PresymplecticError):
            PresymplecticData(base, omega_c, SubbundleSpec(("q",)))

    def test_wrong_kernel_rejected(self):
        base = torus_base(["y1", "y2", "q"])
        omega_c = DifferentialForm(base, 2, (((0, 1), RingElement.one(base)),))
        with pytest.raises(PresymplecticError):
            PresymplecticData(base, omega_c, SubbundleSpec(("y1",)))


class TestPencilInversion:
    def test_all_b_zero_gives_exact_inverse(self):
        rng = rng_for("pencil-azero")
        a = [[Fraction(rng.randint(-3, 3)) for _ in range(3)] for _ in range(3)]
        a[0][0] += Fraction(7)  # nudge away from singularity
        pencil = AffinePencil.from_rationals(
            a, [[[0] * 3 for _ in range(3)]], ("v1",)
        )
        inv = invert_affine_pencil(pencil, 4)
        assert pencil_product_defect(pencil, inv, 10) == []
        assert all(e.is_base_only() or e.is_zero() for row in inv for e in row)

    def test_scalar_geometric_series(self):
        pencil = AffinePencil.from_rationals([[1]], [[[1]]], ("v1",))
        inv = invert_affine_pencil(pencil, 3)
        chart = inv[0][0].chart
        v = RingElement.coordinate(chart, "v1")
        expected = (
            RingElement.one(chart) - v + v ** 2 - v ** 3
        ).truncate(3)
        assert inv[0][0] == expected

    def test_random_4x4_identity_to_order_six(self):
        rng = rng_for("pencil-4x4")
        done = 0
        while done < 5:
            a = [[Fraction(rng.randint(-4, 4)) for _ in range(4)] for _ in range(4)]
            from coisokit._linalg import scalar_det

            if scalar_det([[Scalar.of(x) for x in row] for row in a]).is_zero():
                continue
            bs = [
                [[Fraction(rng.randint(-3, 3)) for _ in range(4)] for _ in range(4)]
                for _ in range(2)
            ]
            pencil = AffinePencil.from_rationals(a, bs, ("v1", "v2"))
            inv = invert_affine_pencil(pencil, 6)
            assert pencil_product_defect(pencil, inv, 6) == []
            done += 1

    def test_prefix_stability(self):
        rng = rng_for("pencil-prefix")
        a = [[Fraction(rng.randint(1, 3)) if i == j else Fraction(rng.randint(-1, 1)) for j in range(3)] for i in range(3)]
        bs = [[[Fraction(rng.randint(-2, 2)) for _ in range(3)] for _ in range(3)]]
        pencil = AffinePencil.from_rationals(a, bs, ("v1",))
        lo = invert_affine_pencil(pencil, 3)
        hi = invert_affine_pencil(pencil, 5)
        for i in range(3):
            for j in range(3):
                assert hi[i][j].truncate(3) == lo[i][j]

    def test_singular_a_rejected(self):
        with pytest.raises(PencilError):
            AffinePencil.from_rationals(
                [[1, 1], [1, 1]], [[[0, 0], [0, 0]]], ("v1",)
            )

    def test_parse_pencil_text(self):
        text = "1 0\n0 1\n\n0 1\n1 0\n"
        pencil = parse_pencil_text(text)
        assert pencil.size == 2
        assert len(pencil.b) == 1
        assert pencil.labels == ("v1",)


class TestSymplecticToPoisson:
    def test_t4_constant_inverse(self):
        chart = make_chart("y1* y2* q1* q2*", "p1 p2")
        one = RingElement.one(chart)
        omega = DifferentialForm(
            chart, 2, (((0, 1), one), ((2, 4), one), ((3, 5), one))
        )
        pi = symplectic_to_poisson(omega)
        expected = MultiVectorField(
            chart, 2, (((0, 1), one), ((2, 4), one), ((3, 5), one))
        )
        assert pi == expected
        assert projection_P(pi).is_zero()
        assert schouten_bracket(pi, pi).is_zero()

    def test_cylinder_pairing(self):
        # Omega = dq ^ dp on T^1 x R inverts to pi = @q ^ @p
        chart = make_chart("q*", "p")
        one = RingElement.one(chart)
        omega = DifferentialForm(chart, 2, (((0, 1), one),))
        pi = symplectic_to_poisson(omega)
        assert pi == MultiVectorField(chart, 2, (((0, 1), one),))

    def test_y_linear_jet(self):
        # closed form with genuine fibre dependence built as Omega0 + d(theta)
        chart = make_chart("x1 x2 q1 q2", "p1 p2")
        one = RingElement.one(chart)
        x2 = RingElement.coordinate(chart, "x2")
        p1 = RingElement.coordinate(chart, "p1")
        theta = DifferentialForm(chart, 1, (((0,), p1 * x2),))
        omega0 = DifferentialForm(
            chart, 2, (((0, 1), one), ((2, 4), one), ((3, 5), one))
        )
        omega = omega0 + de_rham_d(theta)
        assert de_rham_d(omega).is_zero()
        assert is_in_omega_le(omega, 1)
        order = 4
        pi = symplectic_to_poisson(omega, order)
        assert pi.jet_order() == order
        # product identity M * (-pi) = I + O(y^{order+1}), checked exactly
        w = omega.coefficient_matrix()
        minus_pi = [
            [(-c).without_truncation() for c in row]
            for row in pi.coefficient_matrix()
        ]
        n = chart.n_dirs
        for i in range(n):
            for j in range(n):
                acc = RingElement.zero(chart)
                for k in range(n):
                    acc = acc + w[i][k] * minus_pi[k][j]
                if i == j:
                    acc = acc - RingElement.one(chart)
                assert acc.truncate(order).is_zero()
        # truncated Jacobi holds through the reliable order
        assert schouten_bracket(pi, pi).truncate(order - 1).is_zero()
        assert projection_P(pi).is_zero()

    def test_non_affine_rejected(self):
        chart = make_chart("x", "y")
        y = RingElement.coordinate(chart, "y")
        omega = DifferentialForm(chart, 2, (((0, 1), y ** 2),))
        with pytest.raises(NonAffineFibreError):
            symplectic_to_poisson(omega)

    def test_degenerate_rejected(self):
        chart = make_chart("x1 x2", "y1 y2")
        one = RingElement.one(chart)
        omega = DifferentialForm(chart, 2, (((0, 1), one),))
        with pytest.raises(DegenerateBivectorError):
            symplectic_to_poisson(omega)
