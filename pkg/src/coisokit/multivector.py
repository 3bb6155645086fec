"""Graded multivector fields and the Schouten-Nijenhuis calculus.

A multivector of degree k is a finite map from ascending wedge tuples of
coordinate directions to ring-element coefficients.  The Schouten bracket is
computed through the odd-cotangent composition

    X o Y = sum_i (d X / d theta_i) ^ (d Y / d u_i),
    [X, Y] = X o Y - (-1)^{(p-1)(q-1)} Y o X,

where theta_i marks the i-th coordinate direction and the theta-derivative is
the left superderivative.  With this convention [X, f] = X(f) for vector
fields, the bracket restricts to the Lie bracket in degree 1, and the torus
obstruction example reproduces +8*pi^2*cos*cos exactly; that example is the
sign calibration for the whole package.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from ._graded import GradedTerms, merge_dirs
from .coeff_ring import ChartSpec, RingElement, Scalar
from .errors import NotVerticalError, TruncationCapError


class MultiVectorField(GradedTerms):
    """Fibrewise entire multivector field on a chart, in canonical form."""

    def _base_kind(self):
        return MultiVectorField

    def _symbol_prefix(self) -> str:
        return "@"

    @classmethod
    def zero(cls, chart: ChartSpec, degree: int = 0) -> "MultiVectorField":
        return cls(chart, degree, ())

    @classmethod
    def function(cls, chart: ChartSpec, f: RingElement) -> "MultiVectorField":
        return cls(chart, 0, (((), f),))

    @classmethod
    def basis_vector(cls, chart: ChartSpec, name: str) -> "MultiVectorField":
        d = chart.direction_index(name)
        return cls(chart, 1, (((d,), RingElement.one(chart)),))

    @classmethod
    def from_matrix(cls, chart: ChartSpec, entries) -> "MultiVectorField":
        """Degree-2 field sum_{i<j} entries[i][j] @u_i /\\ @u_j."""
        out = []
        n = chart.n_dirs
        for i in range(n):
            for j in range(i + 1, n):
                out.append(((i, j), entries[i][j]))
        return cls(chart, 2, out)

    def coefficient_matrix(self):
        """Full antisymmetric matrix of a degree-2 field."""
        if self.degree != 2:
            raise ValueError("coefficient_matrix requires degree 2")
        n = self.chart.n_dirs
        zero = RingElement.zero(self.chart)
        mat = [[zero for _ in range(n)] for _ in range(n)]
        for (i, j), c in self.terms:
            mat[i][j] = c
            mat[j][i] = -c
        return mat


class VerticalSection(MultiVectorField):
    """Element of Gamma(wedge E): fibre wedge factors, base-only coefficients."""

    def __init__(self, chart, degree, terms):
        super().__init__(chart, degree, terms)
        for dirs, coeff in self.terms:
            if any(not chart.is_fibre_dir(d) for d in dirs):
                raise NotVerticalError(f"wedge {dirs} contains a base direction")
            if not coeff.is_base_only():
                raise NotVerticalError(
                    f"coefficient {coeff.render()!r} depends on a fibre coordinate"
                )

    def _base_kind(self):
        return MultiVectorField

    @classmethod
    def from_components(cls, chart: ChartSpec, components) -> "VerticalSection":
        """Degree-1 section sum_j components[j] e_{y_j}."""
        if len(components) != chart.n_fibre:
            raise NotVerticalError(
                f"expected {chart.n_fibre} components, got {len(components)}"
            )
        m = chart.n_base
        return cls(
            chart, 1, (((m + j,), c) for j, c in enumerate(components))
        )

    def components(self):
        """Component list of a degree-1 section."""
        if self.degree != 1:
            raise ValueError("components() requires degree 1")
        out = [RingElement.zero(self.chart)] * self.chart.n_fibre
        m = self.chart.n_base
        for (d,), c in self.terms:
            out[d - m] = c
        return out


def as_vertical(x: MultiVectorField) -> VerticalSection:
    if isinstance(x, VerticalSection):
        return x
    return VerticalSection(x.chart, x.degree, x.terms)


def _bracket_with_function(chart, f, I, g):
    """Terms of [f * @I, g] = sum_k (-1)^{p-k} f (d g / d u_{i_k}) @I\\k."""
    out = []
    p = len(I)
    for k in range(1, p + 1):
        dg = g.partial(chart.direction_name(I[k - 1]))
        if dg.is_zero():
            continue
        coeff = f * dg
        if (p - k) % 2:
            coeff = -coeff
        out.append((I[:k - 1] + I[k:], coeff))
    return out


def _bracket_term_pair(chart, f, I, g, J):
    """Terms of [f * @I, g * @J] on wedge monomials, both of degree >= 1.

    Views the terms as (f @i1) ^ @i2 ^ ... and (g @j1) ^ @j2 ^ ... and sums
    (-1)^{k+l} [U_k, V_l] ^ (remaining factors in order).
    """
    out = []
    one = RingElement.one(chart)
    p, q = len(I), len(J)
    for k in range(1, p + 1):
        u = I[k - 1]
        a = f if k == 1 else one
        rest_i = I[:k - 1] + I[k:]
        for l in range(1, q + 1):
            v = J[l - 1]
            b = g if l == 1 else one
            rest_j = J[:l - 1] + J[l:]
            m = merge_dirs(rest_i, rest_j)
            if m is None:
                continue
            rest_sign, rest = m
            c_rest = one
            if k != 1:
                c_rest = c_rest * f
            if l != 1:
                c_rest = c_rest * g
            sign = rest_sign if (k + l) % 2 == 0 else -rest_sign
            # Lie bracket [a @u, b @v] = a (db/du) @v - b (da/dv) @u
            for d, c in (
                (v, a * b.partial(chart.direction_name(u))),
                (u, -(b * a.partial(chart.direction_name(v)))),
            ):
                if c.is_zero() or d in rest:
                    continue
                pos = sum(1 for r in rest if r < d)
                s = sign if pos % 2 == 0 else -sign
                dirs = tuple(sorted(rest + (d,)))
                out.append((dirs, c * c_rest if s > 0 else -(c * c_rest)))
    return out


def schouten_bracket(X: MultiVectorField, Y: MultiVectorField) -> MultiVectorField:
    """Schouten-Nijenhuis bracket; degree p+q-1, graded Lie on the shift by 1.

    Characterised by: the Lie bracket on vector fields, [X, f] = X(f) for
    vector fields, graded antisymmetry [X,Y] = -(-1)^{(p-1)(q-1)}[Y,X], and
    the Leibniz rule [X, Y^Z] = [X,Y]^Z + (-1)^{(p-1) q} Y^[X,Z].
    """
    X._check(Y)
    chart = X.chart
    p, q = X.degree, Y.degree
    out = []
    if p == 0 and q == 0:
        return MultiVectorField.zero(chart, 0)
    if q == 0:
        for I, f in X.terms:
            for _, g in Y.terms:
                out.extend(_bracket_with_function(chart, f, I, g))
    elif p == 0:
        # antisymmetry: [f, Y] = -(-1)^{q-1} [Y, f]
        flip = 1 if (q - 1) % 2 else -1
        for J, g in Y.terms:
            for _, f in X.terms:
                for dirs, c in _bracket_with_function(chart, g, J, f):
                    out.append((dirs, c if flip > 0 else -c))
    else:
        for I, f in X.terms:
            for J, g in Y.terms:
                out.extend(_bracket_term_pair(chart, f, I, g, J))
    return MultiVectorField(chart, max(p + q - 1, 0), out)


def projection_P(X: MultiVectorField) -> VerticalSection:
    """Restriction to the zero section followed by the projection onto wedge E.

    Terms with any base wedge factor are discarded; the surviving
    coefficients are evaluated at y = 0.
    """
    chart = X.chart
    out = []
    for dirs, coeff in X.terms:
        if any(not chart.is_fibre_dir(d) for d in dirs):
            continue
        c0 = coeff.at_zero_fibre()
        if not c0.is_zero():
            out.append((dirs, c0))
    return VerticalSection(chart, X.degree, out)


def _check_translation(alpha: MultiVectorField) -> Sequence[RingElement]:
    if alpha.degree != 1:
        raise NotVerticalError("translation section must have degree 1")
    return as_vertical(alpha).components()


def fibre_translate_pushforward(
    X: MultiVectorField, alpha: MultiVectorField
) -> MultiVectorField:
    """Exact pushforward of X under the fibre translation (x, y) -> (x, y + alpha(x)).

    Coefficients are shifted by -alpha, while @x_i picks up
    sum_j (d alpha_j / d x_i) @y_j and the fibre directions are fixed.
    """
    chart = X.chart
    comps = _check_translation(alpha)
    neg = [-a for a in comps]
    m = chart.n_base
    pushed: dict[int, MultiVectorField] = {}
    for d in range(chart.n_dirs):
        if chart.is_fibre_dir(d):
            pushed[d] = MultiVectorField.basis_vector(chart, chart.direction_name(d))
        else:
            name = chart.direction_name(d)
            terms = [((d,), RingElement.one(chart))]
            for j, a in enumerate(comps):
                da = a.partial(name)
                if not da.is_zero():
                    terms.append(((m + j,), da))
            pushed[d] = MultiVectorField(chart, 1, terms)
    out = MultiVectorField.zero(chart, X.degree)
    for dirs, coeff in X.terms:
        piece = MultiVectorField.function(chart, coeff.shift_fibre(neg))
        for d in dirs:
            piece = piece.wedge(pushed[d])
        out = out + piece
    return out


def default_exp_cap(X: MultiVectorField) -> int:
    return X.max_y_degree() + X.degree + 2


def exp_ad(
    X: MultiVectorField, alpha: MultiVectorField, cap: Optional[int] = None
) -> MultiVectorField:
    """The series sum_k (1/k!) [...[X, alpha], ..., alpha] summed to termination.

    For fibrewise polynomial X the series is finite; exceeding ``cap``
    iterations raises instead of truncating silently.
    """
    _check_translation(alpha)
    if cap is None:
        cap = default_exp_cap(X)
    acc = X
    term = X
    fact = Fraction(1)
    k = 0
    while True:
        k += 1
        term = schouten_bracket(term, alpha)
        if term.is_zero():
            return acc
        if k > cap:
            raise TruncationCapError(
                f"adjoint series did not terminate within {cap} brackets; "
                "use jet or numeric mode"
            )
        fact *= k
        acc = acc + term.scale(Scalar.rational(1, fact))


def sharp_contract(pi: MultiVectorField, xi) -> MultiVectorField:
    """The vector field pi(xi, .) for a degree-2 field and a 1-form xi."""
    if pi.degree != 2:
        raise ValueError("sharp_contract requires a degree-2 multivector")
    if getattr(xi, "degree", None) != 1:
        raise ValueError("covector must have degree 1")
    chart = pi.chart
    out: dict[int, RingElement] = {}
    for (i, j), c in pi.terms:
        for (d,), xc in xi.terms:
            # pi(xi, .)_j = sum_i xi_i Pi_{ij} with Pi antisymmetric
            if d == i:
                out[j] = out.get(j, RingElement.zero(chart)) + xc * c
            elif d == j:
                out[i] = out.get(i, RingElement.zero(chart)) - xc * c
    return MultiVectorField(chart, 1, (((k,), v) for k, v in out.items()))
