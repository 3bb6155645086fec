"""Gotay local models and geometric-series inversion of affine symplectic forms.

A presymplectic base (C, omega_C) with declared coordinate-spanned kernel F
produces the local model Omega = (pullback of omega_C) + sum_f dq_f ^ dp_f
on the dual bundle chart.  A form whose fibrewise degrees lie in {0, 1} has a
coefficient matrix M(y) = A(x) + sum_k y_k B_k(x); its inverse is the
truncated Neumann series

    M^{-1} = sum_{r>=0} (-A^{-1} sum_k y_k B_k)^r A^{-1},

computed exactly over the ring whenever det A is an invertible element
(a single scalar-times-mode term; in particular any rational constant).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ._linalg import mat_mul, ring_det, ring_matrix_inverse, scalar_det
from .coeff_ring import ChartSpec, RingElement, Scalar
from .errors import (
    DegenerateBivectorError,
    NonAffineFibreError,
    NonInvertibleScalarError,
    NotPoissonError,
    PencilError,
    PresymplecticError,
)
from .forms import (
    DifferentialForm,
    SubbundleSpec,
    de_rham_d,
    fibrewise_degree_classify,
    interior_product,
    is_in_omega_le,
    pullback_zero_section,
)
from .multivector import MultiVectorField, schouten_bracket


@dataclass(frozen=True)
class PresymplecticData:
    """A closed 2-form on a base chart together with its declared kernel."""

    chart: ChartSpec
    omega: DifferentialForm
    kernel: SubbundleSpec

    def __post_init__(self):
        if self.chart.n_fibre != 0:
            raise PresymplecticError("presymplectic data lives on a base chart")
        if self.omega.chart != self.chart:
            raise PresymplecticError("form does not live on the given chart")
        if self.omega.degree != 2 and not self.omega.is_zero():
            raise PresymplecticError("presymplectic form must have degree 2")
        if not de_rham_d(self.omega).is_zero():
            raise PresymplecticError("form is not closed")
        for name in self.kernel.directions:
            if not interior_product(name, self.omega).is_zero():
                raise PresymplecticError(
                    f"declared kernel direction {name!r} is not annihilated"
                )


@dataclass(frozen=True)
class GotayModel:
    """Bundle chart over C with the local-model symplectic form."""

    chart: ChartSpec
    omega: DifferentialForm
    fibre_for: tuple[tuple[str, str], ...]  # (kernel direction, fibre name)


def _fibre_name(direction: str, taken: set) -> str:
    if direction.startswith("q"):
        candidate = "p" + direction[1:]
        if candidate and candidate not in taken:
            return candidate
    candidate = f"p_{direction}"
    while candidate in taken:
        candidate += "_"
    return candidate


def gotay_local_model(data: PresymplecticData, bound=None) -> GotayModel:
    """Build the chart of E* = F* over C and Omega = pi*omega_C + j*omega_{T*C}."""
    base = data.chart
    taken = set(base.names)
    pairs = []
    for name in data.kernel.directions:
        fn = _fibre_name(name, taken)
        taken.add(fn)
        pairs.append((name, fn))
    chart = base.extend(
        tuple(fn for _, fn in pairs),
        None if bound is None else Fraction(bound),
    )
    omega = DifferentialForm(
        chart,
        2,
        (
            (dirs, coeff.extend_to(chart))
            for dirs, coeff in data.omega.terms
        ),
    )
    m = base.n_base
    for j, (qname, _) in enumerate(pairs):
        q = chart.direction_index(qname)
        omega = omega + DifferentialForm(
            chart, 2, (((q, m + j), RingElement.one(chart)),)
        )
    if pullback_zero_section(omega) != data.omega:
        raise PresymplecticError("local model does not pull back to omega_C")
    if not is_in_omega_le(omega, 1):
        raise PresymplecticError("local model is not fibrewise affine")
    _check_nondegenerate(omega)
    return GotayModel(chart, omega, tuple(pairs))


def _check_nondegenerate(omega: DifferentialForm) -> None:
    mat = omega.coefficient_matrix()
    at_zero = [[c.at_zero_fibre() for c in row] for row in mat]
    det = ring_det(at_zero)
    if det.is_zero():
        raise DegenerateBivectorError("form is degenerate along the zero section")
    if not det.is_constant():
        # sample the base for zeros of the determinant near the zero section
        support = sorted(det.support_names())
        chart = omega.chart
        pts = _base_sample_points(chart, support, per_axis=8)
        for x in pts:
            point = tuple(x) + (0.0,) * chart.n_fibre
            if abs(det.eval(point)) < 1e-9:
                raise DegenerateBivectorError(
                    f"form is numerically degenerate at {point}"
                )


def _base_sample_points(chart: ChartSpec, names: Sequence[str], per_axis: int):
    axes = []
    for i, name in enumerate(chart.base):
        if name in names:
            if chart.periodic[i]:
                axes.append([j / per_axis for j in range(per_axis)])
            else:
                axes.append(
                    [-1.0 + 2.0 * j / (per_axis - 1) for j in range(per_axis)]
                    if per_axis > 1
                    else [0.0]
                )
        else:
            axes.append([0.0])
    out = [()]
    for vals in axes:
        out = [p + (v,) for p in out for v in vals]
    return out


@dataclass(frozen=True)
class AffinePencil:
    """M(lambda) = A + sum_k lambda_k B_k with exact scalar entries."""

    a: tuple
    b: tuple
    labels: tuple[str, ...]

    def __post_init__(self):
        n = len(self.a)
        if any(len(row) != n for row in self.a):
            raise PencilError("A must be square")
        if len(self.b) != len(self.labels):
            raise PencilError("one label per coefficient matrix required")
        for bk in self.b:
            if len(bk) != n or any(len(row) != n for row in bk):
                raise PencilError("B_k must match the size of A")
        if scalar_det(self.a).is_zero():
            raise PencilError("constant part A is singular")

    @property
    def size(self) -> int:
        return len(self.a)

    @classmethod
    def from_rationals(cls, a, b, labels) -> "AffinePencil":
        conv = lambda m: tuple(
            tuple(Scalar.of(Fraction(x)) for x in row) for row in m
        )
        return cls(conv(a), tuple(conv(bk) for bk in b), tuple(labels))


def parse_pencil_text(text: str) -> AffinePencil:
    """Plain-text pencil: blocks of rational rows separated by blank lines."""
    blocks, cur = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            if cur:
                blocks.append(cur)
                cur = []
            continue
        cur.append([Fraction(tok) for tok in line.split()])
    if cur:
        blocks.append(cur)
    if not blocks:
        raise PencilError("empty pencil file")
    a = blocks[0]
    bs = blocks[1:]
    labels = tuple(f"v{k + 1}" for k in range(len(bs)))
    return AffinePencil.from_rationals(a, bs, labels)


def _neumann_inverse(a_ring, b_rings, chart: ChartSpec, order: int):
    """Truncated Neumann series of (A + sum y_k B_k)^{-1} over ring matrices."""
    n = len(a_ring)
    zero = RingElement.zero(chart)
    try:
        ainv = ring_matrix_inverse(a_ring)
    except (NonInvertibleScalarError, DegenerateBivectorError) as exc:
        raise PencilError(f"constant part is not exactly invertible: {exc}") from exc
    x = [[zero for _ in range(n)] for _ in range(n)]
    for k, bk in enumerate(b_rings):
        yk = RingElement.coordinate(chart, chart.fibre[k])
        ab = mat_mul(ainv, bk, zero)
        for i in range(n):
            for j in range(n):
                x[i][j] = x[i][j] - yk * ab[i][j]
    total = [row[:] for row in ainv]
    power = [row[:] for row in ainv]
    for _ in range(order):
        power = mat_mul(x, power, zero)
        for i in range(n):
            for j in range(n):
                total[i][j] = total[i][j] + power[i][j]
    return total


def invert_affine_pencil(
    pencil: AffinePencil, order: int, chart: Optional[ChartSpec] = None
):
    """Truncated Neumann inverse; entries are jets of fibre order ``order``."""
    if chart is None:
        chart = ChartSpec((), (), pencil.labels)
    if chart.fibre != pencil.labels:
        raise PencilError(
            f"chart fibre coordinates {chart.fibre} do not match labels {pencil.labels}"
        )
    lift = lambda m: [
        [RingElement.constant(chart, s) for s in row] for row in m
    ]
    total = _neumann_inverse(lift(pencil.a), [lift(bk) for bk in pencil.b], chart, order)
    return tuple(tuple(e.truncate(order) for e in row) for row in total)


def pencil_product_defect(pencil: AffinePencil, inverse, order: int):
    """Exact check terms of M(lambda) * inverse - I; all must have degree > order."""
    chart = inverse[0][0].chart
    n = pencil.size
    zero = RingElement.zero(chart)
    m = [[RingElement.constant(chart, pencil.a[i][j]) for j in range(n)] for i in range(n)]
    for k, bk in enumerate(pencil.b):
        yk = RingElement.coordinate(chart, chart.fibre[k])
        for i in range(n):
            for j in range(n):
                m[i][j] = m[i][j] + yk.scale(bk[i][j])
    inv_exact = [[e.without_truncation() for e in row] for row in inverse]
    prod = mat_mul(m, inv_exact, zero)
    bad = []
    for i in range(n):
        for j in range(n):
            expected = RingElement.one(chart) if i == j else zero
            diff = prod[i][j] - expected
            low = RingElement(chart, diff.terms, order)
            if not low.is_zero():
                bad.append(((i, j), low))
    return bad


def symplectic_to_poisson(omega: DifferentialForm, order: int = 6) -> MultiVectorField:
    """Invert a fibrewise affine symplectic form into a Poisson bivector.

    Constant forms invert exactly; forms with genuine fibre dependence return
    a jet of the stated order.  The coefficient matrix at y = 0 must have an
    exactly invertible determinant.  The sign is calibrated so that
    Omega = dq /\\ dp inverts to pi = @q /\\ @p.
    """
    chart = omega.chart
    if not is_in_omega_le(omega, 1):
        raise NonAffineFibreError(
            f"fibrewise degrees {sorted(fibrewise_degree_classify(omega))} "
            "exceed the affine range {0, 1}"
        )
    mat = omega.coefficient_matrix()
    n = chart.n_dirs
    a = [[mat[i][j].at_zero_fibre() for j in range(n)] for i in range(n)]
    bs = []
    for k in range(chart.n_fibre):
        bk = [[mat[i][j].y_component(k) for j in range(n)] for i in range(n)]
        bs.append(bk)
    has_fibre_dep = any(
        not bk[i][j].is_zero() for bk in bs for i in range(n) for j in range(n)
    )
    if not has_fibre_dep:
        try:
            minv = ring_matrix_inverse(a)
        except (NonInvertibleScalarError, DegenerateBivectorError) as exc:
            raise DegenerateBivectorError(
                f"form is not exactly invertible at y = 0: {exc}"
            ) from exc
        pi_entries = [[-minv[i][j] for j in range(n)] for i in range(n)]
        pi = MultiVectorField.from_matrix(chart, pi_entries)
        if not schouten_bracket(pi, pi).is_zero():
            raise NotPoissonError("inverse bivector fails the Jacobi identity")
        return pi
    minv = _neumann_inverse(a, bs, chart, order)
    pi_entries = [[(-minv[i][j]).truncate(order) for j in range(n)] for i in range(n)]
    pi = MultiVectorField.from_matrix(chart, pi_entries)
    jac = schouten_bracket(pi, pi)
    if not jac.truncate(order - 1).is_zero():
        raise NotPoissonError(
            "inverse bivector fails the Jacobi identity through the checked "
            "order; the input form is probably not closed"
        )
    return pi
