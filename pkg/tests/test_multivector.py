"""Schouten calculus: bracket axioms, projection, pushforward, adjoint series."""

import pytest

from conftest import (
    rand_base_ring,
    rand_multivector,
    rand_ring,
    rand_section,
    rng_for,
    small_chart,
)
from coisokit import (
    DifferentialForm,
    MultiVectorField,
    NotVerticalError,
    RingElement,
    Scalar,
    TruncationCapError,
    VerticalSection,
    exp_ad,
    fibre_translate_pushforward,
    projection_P,
    schouten_bracket,
    sharp_contract,
)


@pytest.fixture
def chart():
    return small_chart()


def lie_bracket_oracle(X, Y):
    """Coordinate Jacobian formula for vector fields, independent of the
    bracket implementation: [X, Y]_k = X(Y_k) - Y(X_k)."""
    chart = X.chart
    xs = {d: c for (d,), c in X.terms}
    ys = {d: c for (d,), c in Y.terms}
    out = []
    for k in range(chart.n_dirs):
        acc = RingElement.zero(chart)
        for d, c in xs.items():
            yk = ys.get(k)
            if yk is not None:
                acc = acc + c * yk.partial(chart.direction_name(d))
        for d, c in ys.items():
            xk = xs.get(k)
            if xk is not None:
                acc = acc - c * xk.partial(chart.direction_name(d))
        if not acc.is_zero():
            out.append(((k,), acc))
    return MultiVectorField(chart, 1, out)


class TestSchoutenBracket:
    def test_coordinate_lie_bracket(self, chart):
        x1 = MultiVectorField.basis_vector(chart, "x1")
        v = MultiVectorField.basis_vector(chart, "y1").scale(
            RingElement.coordinate(chart, "x1")
        )
        assert schouten_bracket(x1, v) == MultiVectorField.basis_vector(chart, "y1")

    def test_vector_fields_match_jacobian_oracle(self, chart):
        rng = rng_for("lie-oracle")
        for _ in range(50):
            X = rand_multivector(rng, chart, 1)
            Y = rand_multivector(rng, chart, 1)
            assert schouten_bracket(X, Y) == lie_bracket_oracle(X, Y)

    def test_self_bracket_of_vector_field_vanishes(self, chart):
        rng = rng_for("self-bracket")
        for _ in range(20):
            X = rand_multivector(rng, chart, 1)
            assert schouten_bracket(X, X).is_zero()

    def test_function_bracket_is_directional_derivative(self, chart):
        rng = rng_for("fn-bracket")
        for _ in range(20):
            X = rand_multivector(rng, chart, 1)
            f = rand_ring(rng, chart)
            Xf = schouten_bracket(X, MultiVectorField.function(chart, f))
            acc = RingElement.zero(chart)
            for (d,), c in X.terms:
                acc = acc + c * f.partial(chart.direction_name(d))
            assert Xf == MultiVectorField.function(chart, acc)

    def test_graded_antisymmetry(self, chart):
        rng = rng_for("antisym")
        for _ in range(100):
            p, q = rng.randint(0, 3), rng.randint(0, 3)
            X = rand_multivector(rng, chart, p)
            Y = rand_multivector(rng, chart, q)
            sign = -1 if ((p - 1) * (q - 1)) % 2 == 0 else 1
            assert schouten_bracket(X, Y) == schouten_bracket(Y, X).scale(
                Scalar.rational(sign)
            )

    def test_graded_leibniz(self, chart):
        rng = rng_for("leibniz")
        for _ in range(100):
            p, q, r = rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 2)
            X = rand_multivector(rng, chart, p)
            Y = rand_multivector(rng, chart, q)
            Z = rand_multivector(rng, chart, r)
            s = Scalar.rational(-1 if ((p - 1) * q) % 2 else 1)
            lhs = schouten_bracket(X, Y.wedge(Z))
            rhs = schouten_bracket(X, Y).wedge(Z) + Y.wedge(
                schouten_bracket(X, Z)
            ).scale(s)
            assert lhs == rhs

    def test_graded_jacobi(self, chart):
        rng = rng_for("jacobi")
        for _ in range(100):
            p, q, r = rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3)
            X = rand_multivector(rng, chart, p)
            Y = rand_multivector(rng, chart, q)
            Z = rand_multivector(rng, chart, r)
            s = Scalar.rational(-1 if ((p - 1) * (q - 1)) % 2 else 1)
            lhs = schouten_bracket(X, schouten_bracket(Y, Z))
            rhs = schouten_bracket(schouten_bracket(X, Y), Z) + schouten_bracket(
                Y, schouten_bracket(X, Z)
            ).scale(s)
            assert lhs == rhs


class TestVerticalSection:
    def test_rejects_base_wedge_factor(self, chart):
        with pytest.raises(NotVerticalError):
            VerticalSection(chart, 1, (((0,), RingElement.one(chart)),))

    def test_rejects_fibre_dependent_coefficient(self, chart):
        y1 = RingElement.coordinate(chart, "y1")
        with pytest.raises(NotVerticalError):
            VerticalSection(chart, 1, (((2,), y1),))

    def test_components_round_trip(self, chart):
        rng = rng_for("vs-comps")
        comps = [rand_base_ring(rng, chart) for _ in range(2)]
        s = VerticalSection.from_components(chart, comps)
        assert s.components() == comps


class TestProjection:
    def test_keeps_vertical_base_coefficients(self, chart):
        f = rand_base_ring(rng_for("proj"), chart)
        X = MultiVectorField(chart, 2, (((2, 3), f),))
        out = projection_P(X)
        assert isinstance(out, VerticalSection)
        assert out == X

    def test_discards_base_directions(self, chart):
        g = rand_ring(rng_for("proj2"), chart)
        X = MultiVectorField(chart, 2, (((0, 2), g),))
        assert projection_P(X).is_zero()

    def test_discards_positive_fibre_degree(self, chart):
        y1 = RingElement.coordinate(chart, "y1")
        X = MultiVectorField(chart, 2, (((2, 3), y1),))
        assert projection_P(X).is_zero()

    def test_linear_and_depends_only_on_vertical_zero_jet(self, chart):
        rng = rng_for("proj-lin")
        for _ in range(20):
            X = rand_multivector(rng, chart, 2)
            Y = rand_multivector(rng, chart, 2)
            assert projection_P(X + Y) == projection_P(X) + projection_P(Y)
            noise = MultiVectorField(
                chart, 2, (((0, 3), rand_ring(rng, chart)),)
            )
            assert projection_P(X + noise) == projection_P(X)


class TestPushforward:
    def test_basis_vector_formula(self, chart):
        # @x_i picks up sum_j (d alpha_j / d x_i) @y_j
        rng = rng_for("push-basis")
        alpha = rand_section(rng, chart)
        comps = alpha.components()
        for i, nm in enumerate(chart.base):
            pushed = fibre_translate_pushforward(
                MultiVectorField.basis_vector(chart, nm), alpha
            )
            expected = MultiVectorField.basis_vector(chart, nm)
            for j, c in enumerate(comps):
                dc = c.partial(nm)
                if not dc.is_zero():
                    expected = expected + MultiVectorField.basis_vector(
                        chart, chart.fibre[j]
                    ).scale(dc)
            assert pushed == expected

    def test_zero_translation_is_identity(self, chart):
        rng = rng_for("push-zero")
        zero = VerticalSection.from_components(
            chart, [RingElement.zero(chart)] * 2
        )
        for _ in range(10):
            X = rand_multivector(rng, chart, rng.randint(1, 3))
            assert fibre_translate_pushforward(X, zero) == X

    def test_round_trip(self, chart):
        rng = rng_for("push-roundtrip")
        for _ in range(50):
            X = rand_multivector(rng, chart, rng.randint(1, 3))
            alpha = rand_section(rng, chart)
            neg = VerticalSection.from_components(
                chart, [-c for c in alpha.components()]
            )
            there = fibre_translate_pushforward(X, alpha)
            assert fibre_translate_pushforward(there, neg) == X

    def test_commutes_with_wedge(self, chart):
        rng = rng_for("push-wedge")
        for _ in range(30):
            X = rand_multivector(rng, chart, rng.randint(1, 2))
            Y = rand_multivector(rng, chart, rng.randint(1, 2))
            alpha = rand_section(rng, chart)
            lhs = fibre_translate_pushforward(X.wedge(Y), alpha)
            rhs = fibre_translate_pushforward(X, alpha).wedge(
                fibre_translate_pushforward(Y, alpha)
            )
            assert lhs == rhs

    def test_rejects_non_vertical_translation(self, chart):
        X = MultiVectorField.basis_vector(chart, "x1")
        with pytest.raises(NotVerticalError):
            fibre_translate_pushforward(X, X)


class TestExpAd:
    def test_base_vector_terminates_in_two_terms(self, chart):
        rng = rng_for("expad-basis")
        alpha = rand_section(rng, chart)
        for nm in chart.base:
            e = exp_ad(MultiVectorField.basis_vector(chart, nm), alpha)
            assert e == fibre_translate_pushforward(
                MultiVectorField.basis_vector(chart, nm), alpha
            )

    def test_zero_translation(self, chart):
        rng = rng_for("expad-zero")
        zero = VerticalSection.from_components(
            chart, [RingElement.zero(chart)] * 2
        )
        X = rand_multivector(rng, chart, 2)
        assert exp_ad(X, zero) == X

    def test_agrees_with_pushforward_at_zero_section(self, chart):
        rng = rng_for("expad-oracle")
        for _ in range(100):
            pi = rand_multivector(rng, chart, 2, nterms=2, max_ydeg=3)
            alpha = rand_section(rng, chart)
            lhs = exp_ad(pi, alpha).at_zero_fibre()
            rhs = fibre_translate_pushforward(pi, alpha).at_zero_fibre()
            assert lhs == rhs

    def test_cap_exceeded_raises(self, chart):
        y1 = RingElement.coordinate(chart, "y1")
        X = MultiVectorField(chart, 2, (((2, 3), y1 ** 3),))
        alpha = VerticalSection.from_components(
            chart,
            [RingElement.constant(chart, 1), RingElement.zero(chart)],
        )
        with pytest.raises(TruncationCapError):
            exp_ad(X, alpha, cap=1)


class TestSharpContract:
    def test_basis_pairing(self, chart):
        pi = MultiVectorField(chart, 2, (((0, 2), RingElement.one(chart)),))
        xi = DifferentialForm.basis_covector(chart, "x1")
        assert sharp_contract(pi, xi) == MultiVectorField.basis_vector(chart, "y1")

    def test_zero_covector(self, chart):
        rng = rng_for("sharp-zero")
        pi = rand_multivector(rng, chart, 2)
        assert sharp_contract(pi, DifferentialForm.zero(chart, 1)).is_zero()

    def test_antisymmetry_of_evaluation(self, chart):
        rng = rng_for("sharp-anti")
        for _ in range(50):
            pi = rand_multivector(rng, chart, 2)
            xi = DifferentialForm(
                chart,
                1,
                (
                    ((rng.randrange(chart.n_dirs),), rand_ring(rng, chart)),
                    ((rng.randrange(chart.n_dirs),), rand_ring(rng, chart)),
                ),
            )
            eta = DifferentialForm(
                chart,
                1,
                (((rng.randrange(chart.n_dirs),), rand_ring(rng, chart)),),
            )

            def pair(v, w):
                acc = RingElement.zero(chart)
                for (d,), c in v.terms:
                    for (e,), g in w.terms:
                        if d == e:
                            acc = acc + c * g
                return acc

            lhs = pair(sharp_contract(pi, xi), eta)
            rhs = pair(sharp_contract(pi, eta), xi)
            assert lhs == -rhs
