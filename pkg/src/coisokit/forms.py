"""Differential forms with exact coefficients: d, gradings, pullbacks, musicals.

Forms share the wedge-term container with multivector fields; the basis
symbols are the coordinate differentials ``dx_i``/``dy_j``.  The musical maps
are implemented for bivectors whose coefficient matrix is constant, which is
what every torus-type model here produces; in that case all inversions are
exact over the scalar ring.
"""

from __future__ import annotations

from dataclasses import dataclass

from ._graded import GradedTerms, merge_dirs
from ._linalg import scalar_matrix_inverse
from .coeff_ring import ChartSpec, RingElement, Scalar
from .errors import (
    DegenerateBivectorError,
    NonInvertibleScalarError,
    NotVerticalError,
    UnknownCoordinateError,
)
from .multivector import MultiVectorField, VerticalSection, as_vertical


class DifferentialForm(GradedTerms):
    """Exterior form with ring-element coefficients, in canonical form."""

    def _base_kind(self):
        return DifferentialForm

    def _symbol_prefix(self) -> str:
        return "d"

    @classmethod
    def zero(cls, chart: ChartSpec, degree: int = 0) -> "DifferentialForm":
        return cls(chart, degree, ())

    @classmethod
    def function(cls, chart: ChartSpec, f: RingElement) -> "DifferentialForm":
        return cls(chart, 0, (((), f),))

    @classmethod
    def basis_covector(cls, chart: ChartSpec, name: str) -> "DifferentialForm":
        d = chart.direction_index(name)
        return cls(chart, 1, (((d,), RingElement.one(chart)),))

    @classmethod
    def from_matrix(cls, chart: ChartSpec, entries) -> "DifferentialForm":
        out = []
        n = chart.n_dirs
        for i in range(n):
            for j in range(i + 1, n):
                out.append(((i, j), entries[i][j]))
        return cls(chart, 2, out)

    def coefficient_matrix(self):
        """Full antisymmetric matrix of a degree-2 form."""
        if self.degree != 2:
            raise ValueError("coefficient_matrix requires degree 2")
        n = self.chart.n_dirs
        zero = RingElement.zero(self.chart)
        mat = [[zero for _ in range(n)] for _ in range(n)]
        for (i, j), c in self.terms:
            mat[i][j] = c
            mat[j][i] = -c
        return mat


@dataclass(frozen=True)
class SubbundleSpec:
    """A subbundle F of TC spanned by base coordinate directions."""

    directions: tuple[str, ...]

    def __post_init__(self):
        if not self.directions:
            raise ValueError("a subbundle needs at least one direction")

    def indices(self, chart: ChartSpec) -> tuple[int, ...]:
        out = []
        for name in self.directions:
            d = chart.direction_index(name)
            if chart.is_fibre_dir(d):
                raise UnknownCoordinateError(
                    f"{name!r} is a fibre coordinate, not a base direction"
                )
            out.append(d)
        return tuple(out)


def de_rham_d(w: DifferentialForm) -> DifferentialForm:
    """Exterior derivative; d o d = 0 exactly."""
    chart = w.chart
    out = []
    for dirs, coeff in w.terms:
        for d in range(chart.n_dirs):
            dc = coeff.partial(chart.direction_name(d))
            if dc.is_zero():
                continue
            m = merge_dirs((d,), dirs)
            if m is None:
                continue
            sign, merged = m
            out.append((merged, dc if sign > 0 else -dc))
    return DifferentialForm(chart, w.degree + 1, out)


def fibrewise_degree_classify(w: DifferentialForm) -> frozenset:
    """Set of fibrewise degrees: y-degree of the coefficient plus dy count."""
    chart = w.chart
    out = set()
    for dirs, coeff in w.terms:
        dy = sum(1 for d in dirs if chart.is_fibre_dir(d))
        for _, _, ye, _ in coeff.terms:
            out.add(sum(ye) + dy)
    return frozenset(out)


def is_in_omega_le(w: DifferentialForm, k: int) -> bool:
    degrees = fibrewise_degree_classify(w)
    return max(degrees, default=0) <= k


def pullback_zero_section(w: DifferentialForm) -> DifferentialForm:
    """Pull back along the zero section: set y = 0 and dy = 0."""
    chart = w.chart
    base = chart.base_chart()
    out = []
    for dirs, coeff in w.terms:
        if any(chart.is_fibre_dir(d) for d in dirs):
            continue
        c0 = coeff.at_zero_fibre()
        if not c0.is_zero():
            out.append((dirs, c0.restrict_to_base()))
    return DifferentialForm(base, w.degree, out)


def interior_product(direction: str, w: DifferentialForm) -> DifferentialForm:
    """Contraction i_{@direction} w for a coordinate direction."""
    d = w.chart.direction_index(direction)
    out = []
    for dirs, coeff in w.terms:
        if d in dirs:
            pos = dirs.index(d)
            rest = dirs[:pos] + dirs[pos + 1 :]
            out.append((rest, coeff if pos % 2 == 0 else -coeff))
    return DifferentialForm(w.chart, max(w.degree - 1, 0), out)


def restrict_to_subbundle(w: DifferentialForm, F: SubbundleSpec) -> DifferentialForm:
    """Keep only the terms whose every factor lies along F."""
    fdirs = set(F.indices(w.chart))
    out = [(dirs, c) for dirs, c in w.terms if set(dirs) <= fdirs]
    return DifferentialForm(w.chart, w.degree, out)


def leafwise_d(w: DifferentialForm, F: SubbundleSpec) -> DifferentialForm:
    """Exterior derivative along the leaves of F only.

    Requires adapted coordinates: w may only contain dF factors and its
    coefficients must not depend on fibre coordinates.
    """
    chart = w.chart
    fdirs = F.indices(chart)
    fset = set(fdirs)
    out = []
    for dirs, coeff in w.terms:
        if not set(dirs) <= fset:
            raise NotVerticalError(
                f"form has a factor outside the subbundle: {dirs}"
            )
        if not coeff.is_base_only():
            raise NotVerticalError("leafwise form has fibre-dependent coefficients")
        for d in fdirs:
            dc = coeff.partial(chart.direction_name(d))
            if dc.is_zero():
                continue
            m = merge_dirs((d,), dirs)
            if m is None:
                continue
            sign, merged = m
            out.append((merged, dc if sign > 0 else -dc))
    return DifferentialForm(chart, w.degree + 1, out)


def linear_fibre_change(w: DifferentialForm, matrix) -> DifferentialForm:
    """Pull back along the bundle map (x, y) -> (x, M y) for a rational matrix."""
    chart = w.chart
    n = chart.n_fibre
    exprs = []
    for j in range(n):
        e = RingElement.zero(chart)
        for kk in range(n):
            if matrix[j][kk]:
                e = e + RingElement.coordinate(chart, chart.fibre[kk]).scale(
                    Scalar.of(matrix[j][kk])
                )
        exprs.append(e)
    m = chart.n_base
    mapped: dict[int, DifferentialForm] = {}
    for d in range(chart.n_dirs):
        if not chart.is_fibre_dir(d):
            mapped[d] = DifferentialForm.basis_covector(chart, chart.direction_name(d))
        else:
            j = d - m
            terms = []
            for kk in range(n):
                if matrix[j][kk]:
                    terms.append(
                        (
                            (m + kk,),
                            RingElement.constant(chart, matrix[j][kk]),
                        )
                    )
            mapped[d] = DifferentialForm(chart, 1, terms)
    out = DifferentialForm.zero(chart, w.degree)
    for dirs, coeff in w.terms:
        piece = DifferentialForm.function(chart, coeff.substitute_fibre(exprs))
        for d in dirs:
            piece = piece.wedge(mapped[d])
        out = out + piece
    return out


# -- musical maps over a constant bivector ---------------------------------------


def _constant_matrix(pi: MultiVectorField):
    """Scalar coefficient matrix of a constant degree-2 field, or None."""
    mat = pi.coefficient_matrix()
    out = []
    for row in mat:
        srow = []
        for c in row:
            if c.is_zero():
                srow.append(Scalar.zero())
            elif c.is_constant():
                srow.append(c.constant_scalar())
            else:
                return None
        out.append(srow)
    return out


def _sharp_matrix(pi: MultiVectorField):
    """Matrix S with sharp(du_i) = sum_j S[i][j] @u_j, for constant pi."""
    mat = _constant_matrix(pi)
    if mat is None:
        raise NonInvertibleScalarError(
            "musical maps need a constant-coefficient bivector; "
            "use jet mode via the pencil inversion otherwise"
        )
    return mat  # sharp(xi)_j = sum_i xi_i Pi_{ij}, so S = Pi itself


def sharp_star(pi: MultiVectorField, w: DifferentialForm) -> MultiVectorField:
    """The dualized musical map wedge T*E -> wedge TE, factor by factor.

    On covectors this is the transpose xi -> pi(., xi) of the anchor, the
    same dualization that defines the leafwise variant; with this choice
    P(sharp_star(w)) equals the leafwise image of the restriction of w.
    """
    chart = pi.chart
    S = _sharp_matrix(pi)
    n = chart.n_dirs
    images = []
    for i in range(n):
        terms = []
        for j in range(n):
            if not S[j][i].is_zero():
                terms.append(((j,), RingElement.constant(chart, 1).scale(S[j][i])))
        images.append(MultiVectorField(chart, 1, terms))
    out = MultiVectorField.zero(chart, w.degree)
    for dirs, coeff in w.terms:
        piece = MultiVectorField.function(chart, coeff)
        for d in dirs:
            piece = piece.wedge(images[d])
        out = out + piece
    return out


def _full_inverse_images(pi: MultiVectorField):
    """Covector images xi^(i) with sharp_star(xi^(i)) = @u_i.

    sharp_star sends xi to S xi in column convention, so xi^(i) is column i
    of S^{-1}.
    """
    chart = pi.chart
    S = _sharp_matrix(pi)
    Sinv = scalar_matrix_inverse(S)
    n = chart.n_dirs
    images = []
    for i in range(n):
        terms = []
        for j in range(n):
            if not Sinv[j][i].is_zero():
                terms.append(((j,), RingElement.constant(chart, 1).scale(Sinv[j][i])))
        images.append(DifferentialForm(chart, 1, terms))
    return images


def _tilde_matrix(pi: MultiVectorField):
    """Leafwise sharp data: (F direction indices, matrix B with
    sharp(dy_j*) = sum_f B[f][j] @x_f over the F directions)."""
    chart = pi.chart
    S = _sharp_matrix(pi)
    m, n = chart.n_base, chart.n_fibre
    rows = {}
    for j in range(n):
        row = S[m + j]
        for k in range(m, m + n):
            if not row[k].is_zero():
                raise DegenerateBivectorError(
                    "zero section is not coisotropic: sharp of the conormal "
                    "has a vertical component"
                )
        for f in range(m):
            if not row[f].is_zero():
                rows.setdefault(f, None)
    fdirs = tuple(sorted(rows))
    if len(fdirs) != n:
        raise DegenerateBivectorError(
            f"leafwise image spans {len(fdirs)} directions, need {n}"
        )
    B = [[S[m + j][f] for j in range(n)] for f in fdirs]
    return fdirs, B


def leaf_subbundle(pi: MultiVectorField) -> SubbundleSpec:
    """The subbundle F = sharp(conormal) inferred from a constant bivector."""
    fdirs, _ = _tilde_matrix(pi)
    return SubbundleSpec(tuple(pi.chart.direction_name(d) for d in fdirs))


def leafwise_sharp_star(pi: MultiVectorField, w: DifferentialForm) -> VerticalSection:
    """The forward map Gamma(wedge F*) -> Gamma(wedge E), factor by factor.

    ``w`` lives on the base chart with only dF factors; the result is a
    vertical section on the bundle chart of ``pi``.
    """
    chart = pi.chart
    fdirs, B = _tilde_matrix(pi)
    m, n = chart.n_base, chart.n_fibre
    pos = {d: r for r, d in enumerate(fdirs)}
    images = {}
    for d in fdirs:
        terms = []
        for j in range(n):
            b = B[pos[d]][j]
            if not b.is_zero():
                terms.append(((m + j,), RingElement.constant(chart, 1).scale(b)))
        images[d] = MultiVectorField(chart, 1, terms)
    out = MultiVectorField.zero(chart, w.degree)
    base = chart.base_chart()
    if w.chart != base:
        raise UnknownCoordinateError("leafwise form must live on the base chart")
    for dirs, coeff in w.terms:
        piece = MultiVectorField.function(chart, coeff.extend_to(chart))
        for d in dirs:
            if d not in images:
                raise NotVerticalError(f"factor {d} is not an F direction")
            piece = piece.wedge(images[d])
        out = out + piece
    return as_vertical(out)


def leafwise_sharp_inverse(pi: MultiVectorField, z: MultiVectorField) -> DifferentialForm:
    """The inverse of the leafwise musical map on vertical sections.

    Returns a form on the base chart with only dF factors.
    """
    section = as_vertical(z)
    chart = pi.chart
    fdirs, B = _tilde_matrix(pi)
    n = chart.n_fibre
    m = chart.n_base
    # components of sharp_star~(zeta) are (B^T zeta); invert B^T exactly.
    Bt = [[B[f][j] for f in range(n)] for j in range(n)]
    BtInv = scalar_matrix_inverse(Bt)
    base = chart.base_chart()
    images = []
    for j in range(n):
        terms = []
        for f in range(n):
            c = BtInv[f][j]
            if not c.is_zero():
                terms.append(((fdirs[f],), RingElement.constant(base, 1).scale(c)))
        images.append(DifferentialForm(base, 1, terms))
    out = DifferentialForm.zero(base, section.degree)
    for dirs, coeff in section.terms:
        piece = DifferentialForm.function(base, coeff.restrict_to_base())
        for d in dirs:
            piece = piece.wedge(images[d - m])
        out = out + piece
    return out


def sharp_star_inverse(pi: MultiVectorField, Z: MultiVectorField) -> DifferentialForm:
    """The factorwise inverse of sharp_star on full multivectors."""
    chart = pi.chart
    images = _full_inverse_images(pi)
    out = DifferentialForm.zero(chart, Z.degree)
    for dirs, coeff in Z.terms:
        piece = DifferentialForm.function(chart, coeff)
        for d in dirs:
            piece = piece.wedge(images[d])
        out = out + piece
    return out


def musical_inverse(pi: MultiVectorField, Z: MultiVectorField) -> DifferentialForm:
    """Apply the inverse musical isomorphism factor by factor.

    Vertical sections go through the leafwise variant (into forms over F on
    the base chart); general multivectors through the full inverse.
    """
    if isinstance(Z, VerticalSection):
        return leafwise_sharp_inverse(pi, Z)
    return sharp_star_inverse(pi, Z)
