"""Coisotropic multibrackets, Maurer-Cartan series, and the twisted algebra.

The brackets on vertical sections are iterated Schouten brackets with the
bivector followed by the projection onto wedge E:

    lambda_k(a_1, ..., a_k) = P([...[pi, a_1], ..., a_k]).

The Maurer-Cartan series of a degree-1 section alpha is
sum_{k>=1} (1/k!) lambda_k(alpha, ..., alpha); for fibrewise polynomial pi it
terminates and equals the projection of the exact pushforward of pi under the
fibre translation by alpha, which is the identity every exact test here leans
on.  The twisted brackets extend this to pairs (multivector, section) and
govern simultaneous deformation of the bivector and the submanifold.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .coeff_ring import ChartSpec, Scalar
from .errors import (
    DomainBoundError,
    JetOrderError,
    NotClosedError,
    NotCoisotropicError,
    NotPoissonError,
    NotVerticalError,
    TruncationCapError,
)
from .forms import DifferentialForm
from .multivector import (
    MultiVectorField,
    VerticalSection,
    as_vertical,
    default_exp_cap,
    projection_P,
    schouten_bracket,
)


@dataclass(frozen=True)
class CoisoAlgebra:
    """A chart with a bivector for which the zero section is coisotropic.

    ``poisson_verified`` records whether [pi, pi] = 0 was checked (exactly,
    or through the jet order for jets).  ``source_form`` optionally keeps the
    symplectic form the bivector was inverted from; numeric oracles prefer it
    because it is exact where the bivector may only be a jet.
    """

    chart: ChartSpec
    pi: MultiVectorField
    poisson_verified: bool = False
    source_form: Optional[DifferentialForm] = None


def make_coiso_algebra(
    pi: MultiVectorField,
    require_poisson: bool = True,
    source_form: Optional[DifferentialForm] = None,
) -> CoisoAlgebra:
    """Validate P(pi) = 0 (always) and the Jacobi identity (unless waived)."""
    if pi.degree != 2:
        raise NotCoisotropicError("a coisotropic algebra needs a degree-2 field")
    if not projection_P(pi).is_zero():
        raise NotCoisotropicError(
            "zero section is not coisotropic: P(pi) != 0"
        )
    verified = False
    if require_poisson:
        jac = schouten_bracket(pi, pi)
        if pi.jet_order() is None:
            ok = jac.is_zero()
        else:
            ok = jac.truncate(pi.jet_order() - 1).is_zero()
        if not ok:
            raise NotPoissonError("bivector fails the Jacobi identity")
        verified = True
    return CoisoAlgebra(pi.chart, pi, verified, source_form)


def coiso_algebra_from_form(
    omega: DifferentialForm, truncation: int = 6
) -> CoisoAlgebra:
    """Invert a fibrewise affine symplectic form and wrap it as an algebra."""
    from .symplectic_model import symplectic_to_poisson

    pi = symplectic_to_poisson(omega, truncation)
    return make_coiso_algebra(pi, require_poisson=True, source_form=omega)


# -- brackets -----------------------------------------------------------------


def lambda_n(alg: CoisoAlgebra, *sections: MultiVectorField) -> VerticalSection:
    """P([...[pi, a_1], ..., a_n]) for vertical sections a_i."""
    cur = alg.pi
    for a in sections:
        cur = schouten_bracket(cur, as_vertical(a))
    return projection_P(cur)


def kuranishi_rep(alg: CoisoAlgebra, a: MultiVectorField) -> VerticalSection:
    """The Kuranishi representative lambda_2(a, a) of a lambda_1-closed a."""
    if not lambda_n(alg, a).is_zero():
        raise NotClosedError("section is not lambda_1-closed: P([pi, a]) != 0")
    return lambda_n(alg, a, a)


def _ad_chain(start: MultiVectorField, alpha: VerticalSection, cap: int):
    """Yield [ ... [start, alpha], ..., alpha] for k = 1, 2, ... up to cap."""
    cur = start
    for _ in range(cap):
        cur = schouten_bracket(cur, alpha)
        yield cur


def mc_series_exact(
    alg: CoisoAlgebra, alpha: MultiVectorField, cap: Optional[int] = None
) -> VerticalSection:
    """Sum the Maurer-Cartan series of a degree-1 section to termination.

    Requires a fibrewise polynomial bivector (no jet truncation); equals
    P of the pushforward of pi under the fibre translation by alpha.
    """
    alpha = as_vertical(alpha)
    if alpha.degree != 1:
        raise NotVerticalError("Maurer-Cartan input must have degree 1")
    if alg.pi.jet_order() is not None:
        raise JetOrderError(
            "mc_series_exact needs polynomial mode; use mc_partial_table for jets"
        )
    _check_domain(alg, alpha)
    if cap is None:
        cap = default_exp_cap(alg.pi)
    acc = MultiVectorField.zero(alg.chart, alg.pi.degree)
    fact = Fraction(1)
    for k, term in enumerate(_ad_chain(alg.pi, alpha, cap), start=1):
        if term.is_zero():
            break
        fact *= k
        acc = acc + projection_P(term).scale(Scalar.rational(1, fact))
    else:
        raise TruncationCapError(
            f"Maurer-Cartan series did not terminate within {cap} brackets"
        )
    return as_vertical(acc)


def _check_domain(alg: CoisoAlgebra, alpha: VerticalSection, per_axis: int = 32):
    bound = alg.chart.fibre_bound
    if bound is None:
        return
    comps = alpha.components()
    names = sorted(alpha.support_names())
    for x in sample_grid(alg.chart, names, per_axis=per_axis):
        point = tuple(x) + (0.0,) * alg.chart.n_fibre
        sup = max((abs(c.eval(point)) for c in comps), default=0.0)
        if sup > float(bound):
            raise DomainBoundError(
                f"graph(-alpha) leaves the tubular domain: |alpha| = {sup:.6g} "
                f"> {float(bound):.6g} at {x}"
            )


# -- numeric grids and oracles -----------------------------------------------


def _per_axis_default(n_axes: int, budget: int = 4096, hard_cap: int = 32) -> int:
    if n_axes <= 0:
        return 1
    per = int(budget ** (1.0 / n_axes) + 1e-9)
    return max(2, min(hard_cap, per))


def sample_grid(
    chart: ChartSpec, names: Sequence[str], per_axis: Optional[int] = None
):
    """Deterministic base-point grid varying only the named coordinates.

    Periodic axes take ``per_axis`` points in [0, 1); non-periodic axes take
    them in [-1, 1].  All other coordinates stay at 0.
    """
    wanted = set(names)
    active = [i for i, nm in enumerate(chart.base) if nm in wanted]
    if per_axis is None:
        per_axis = _per_axis_default(len(active))
    axes = []
    for i in range(chart.n_base):
        if i not in active:
            axes.append((0.0,))
        elif chart.periodic[i]:
            axes.append(tuple(j / per_axis for j in range(per_axis)))
        elif per_axis == 1:
            axes.append((0.0,))
        else:
            axes.append(
                tuple(-1.0 + 2.0 * j / (per_axis - 1) for j in range(per_axis))
            )
    return tuple(itertools.product(*axes))


def _numeric_matrix(alg_or_pi, point) -> np.ndarray:
    """True bivector matrix at a full chart point, preferring the source form."""
    if isinstance(alg_or_pi, CoisoAlgebra):
        if alg_or_pi.source_form is not None:
            w = alg_or_pi.source_form.coefficient_matrix()
            wn = np.array([[c.eval(point) for c in row] for row in w])
            return -np.linalg.inv(wn)
        pi = alg_or_pi.pi
    else:
        pi = alg_or_pi
    mat = pi.coefficient_matrix()
    return np.array([[c.eval(point) for c in row] for row in mat])


def _alpha_jacobian(alpha: VerticalSection):
    """Symbolic entries d alpha_j / d x_i, indexed [j][i]."""
    chart = alpha.chart
    comps = alpha.components()
    return [
        [c.partial(chart.base[i]) for i in range(chart.n_base)] for c in comps
    ]


def pushforward_oracle_numeric(alg_or_pi, alpha: VerticalSection, x) -> np.ndarray:
    """Vertical block of the pushed bivector at (x, 0), computed numerically.

    Evaluates the true matrix at (x, -alpha(x)) and conjugates with the
    translation Jacobian; independent of the symbolic bracket machinery.
    """
    chart = alpha.chart
    comps = alpha.components()
    base_point = tuple(x) + (0.0,) * chart.n_fibre
    avals = [c.eval(base_point) for c in comps]
    point = tuple(x) + tuple(-v for v in avals)
    piv = _numeric_matrix(alg_or_pi, point)
    m, n = chart.n_base, chart.n_fibre
    jac = np.eye(m + n, dtype=complex)
    dalpha = _alpha_jacobian(alpha)
    for j in range(n):
        for i in range(m):
            jac[m + j, i] = dalpha[j][i].eval(base_point)
    pushed = jac @ piv @ jac.T
    return pushed[m:, m:]


# -- partial-sum convergence tables ---------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    point: tuple
    n: int
    partial: tuple
    oracle: tuple
    abs_error: float


@dataclass(frozen=True)
class ConvergenceTable:
    """Per-point Maurer-Cartan partial sums against the numeric oracle."""

    component_names: tuple[str, ...]
    point_names: tuple[str, ...]
    rows: tuple[ConvergenceRow, ...]

    def __post_init__(self):
        seen: dict[tuple, int] = {}
        for row in self.rows:
            if row.abs_error < 0:
                raise ValueError("absolute errors must be nonnegative")
            last = seen.get(row.point)
            if last is not None and row.n <= last:
                raise ValueError("orders must increase per point")
            seen[row.point] = row.n

    def max_error_at(self, n: int) -> float:
        return max((r.abs_error for r in self.rows if r.n == n), default=0.0)

    def to_csv(self) -> str:
        header = (
            list(self.point_names)
            + ["n"]
            + [f"partial_{c}" for c in self.component_names]
            + [f"oracle_{c}" for c in self.component_names]
            + ["abs_error"]
        )
        lines = [",".join(header)]
        for r in self.rows:
            vals = (
                [f"{v:.12g}" for v in r.point]
                + [str(r.n)]
                + [f"{v:.12e}" for v in r.partial]
                + [f"{v:.12e}" for v in r.oracle]
                + [f"{r.abs_error:.12e}"]
            )
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def _component_dirs(chart: ChartSpec, degree: int):
    fdirs = range(chart.n_base, chart.n_dirs)
    return list(itertools.combinations(fdirs, degree))


def _real_part(value: complex) -> float:
    if abs(value.imag) > 1e-9 * (abs(value) + 1.0):
        raise ValueError(f"expected a real value, got {value}")
    return value.real


def mc_partial_table(
    alg: CoisoAlgebra,
    alpha: MultiVectorField,
    order: int,
    points=None,
    per_axis: Optional[int] = None,
) -> ConvergenceTable:
    """Numeric partial sums beta_n for n = 1..order against the pushforward oracle."""
    alpha = as_vertical(alpha)
    jet = alg.pi.jet_order()
    if jet is not None and jet < order:
        raise JetOrderError(f"jet order {jet} is below the requested order {order}")
    chart = alg.chart
    if points is None:
        names = sorted(alg.pi.support_names() | alpha.support_names())
        points = sample_grid(chart, names, per_axis=per_axis)
    comp_dirs = _component_dirs(chart, alg.pi.degree)
    comp_names = ["".join(chart.direction_name(d) for d in dirs) for dirs in comp_dirs]
    partials = []
    acc = MultiVectorField.zero(chart, alg.pi.degree)
    cur = alg.pi
    fact = Fraction(1)
    for k in range(1, order + 1):
        cur = schouten_bracket(cur, alpha)
        fact *= k
        if not cur.is_zero():
            acc = acc + projection_P(cur).scale(Scalar.rational(1, fact))
        partials.append(acc)
    rows = []
    for x in points:
        oracle_mat = pushforward_oracle_numeric(alg, alpha, x)
        oracle = tuple(
            _real_part(oracle_mat[i - chart.n_base, j - chart.n_base])
            for i, j in comp_dirs
        )
        full = tuple(x) + (0.0,) * chart.n_fibre
        for n, beta in enumerate(partials, start=1):
            vals = tuple(
                _real_part(beta.coefficient(dirs).eval(full)) for dirs in comp_dirs
            )
            err = max(
                (abs(v - o) for v, o in zip(vals, oracle)), default=0.0
            )
            rows.append(ConvergenceRow(tuple(x), n, vals, oracle, err))
    return ConvergenceTable(
        tuple(comp_names), tuple(chart.base), tuple(rows)
    )


# -- numeric coisotropy check ----------------------------------------------------


@dataclass(frozen=True)
class CoisotropyResult:
    coisotropic: bool
    max_defect: float


def coisotropy_check_numeric(
    alg_or_pi,
    alpha: MultiVectorField,
    points=None,
    per_axis: Optional[int] = None,
    tol: float = 1e-9,
) -> CoisotropyResult:
    """Measure the conormal defect of graph(-alpha) on a sample grid.

    At each point the conormal of the graph is spanned by
    xi_j = dy_j + sum_i (d alpha_j / d x_i) dx_i; the graph is coisotropic
    exactly when the bivector vanishes on conormal pairs, so the defect is
    max |xi_k . Pi . xi_j| over the frame.
    """
    alpha = as_vertical(alpha)
    chart = alpha.chart
    pi = alg_or_pi.pi if isinstance(alg_or_pi, CoisoAlgebra) else alg_or_pi
    if points is None:
        names = sorted(pi.support_names() | alpha.support_names())
        points = sample_grid(chart, names, per_axis=per_axis)
    comps = alpha.components()
    dalpha = _alpha_jacobian(alpha)
    m, n = chart.n_base, chart.n_fibre
    worst = 0.0
    for x in points:
        base_point = tuple(x) + (0.0,) * n
        avals = [c.eval(base_point) for c in comps]
        point = tuple(x) + tuple(-v for v in avals)
        piv = _numeric_matrix(alg_or_pi, point)
        xi = np.zeros((n, m + n), dtype=complex)
        for j in range(n):
            xi[j, m + j] = 1.0
            for i in range(m):
                xi[j, i] = dalpha[j][i].eval(base_point)
        defect = xi @ piv @ xi.T
        worst = max(worst, float(np.max(np.abs(defect))))
    return CoisotropyResult(worst <= tol, worst)


# -- twisted algebra ---------------------------------------------------------------


class TwistedElement:
    """Element (X[1], a) of the twisted algebra W(C, pi).

    A multivector of degree p sits in W-degree p - 2; a vertical section of
    wedge degree q sits in W-degree q - 1.  Maurer-Cartan inputs
    (tau[1], alpha) are homogeneous of W-degree 0.
    """

    __slots__ = ("chart", "mv", "section", "degree")

    def __init__(self, chart, mv=None, section=None, degree=None):
        if mv is not None and mv.is_zero():
            mv = None
        if section is not None and section.is_zero():
            section = None
        self.chart = chart
        self.mv = mv
        self.section = None if section is None else as_vertical(section)
        degs = set()
        if mv is not None:
            degs.add(mv.degree - 2)
        if section is not None:
            degs.add(section.degree - 1)
        if len(degs) > 1:
            raise ValueError(f"inhomogeneous twisted element: W-degrees {degs}")
        if degs:
            inferred = degs.pop()
            if degree is not None and degree != inferred:
                raise ValueError("stated degree contradicts the components")
            degree = inferred
        elif degree is None:
            degree = 0
        self.degree = degree

    @classmethod
    def from_multivector(cls, X: MultiVectorField) -> "TwistedElement":
        return cls(X.chart, mv=X)

    @classmethod
    def from_section(cls, a: MultiVectorField) -> "TwistedElement":
        return cls(a.chart, section=as_vertical(a))

    @classmethod
    def zero(cls, chart: ChartSpec, degree: int = 0) -> "TwistedElement":
        return cls(chart, degree=degree)

    def is_zero(self) -> bool:
        return self.mv is None and self.section is None

    def mv_part(self) -> MultiVectorField:
        if self.mv is None:
            return MultiVectorField.zero(self.chart, self.degree + 2)
        return self.mv

    def section_part(self) -> VerticalSection:
        if self.section is None:
            return VerticalSection(self.chart, self.degree + 1, ())
        return self.section

    def __add__(self, other):
        if not isinstance(other, TwistedElement):
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ValueError("cannot add twisted elements of different degree")
        return TwistedElement(
            self.chart,
            mv=self.mv_part() + other.mv_part(),
            section=self.section_part() + other.section_part(),
            degree=self.degree,
        )

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "TwistedElement":
        return TwistedElement(
            self.chart,
            mv=None if self.mv is None else self.mv.scale(Scalar.of(s)),
            section=None if self.section is None else self.section.scale(Scalar.of(s)),
            degree=self.degree,
        )

    def __eq__(self, other):
        if not isinstance(other, TwistedElement):
            return NotImplemented
        return (
            self.chart == other.chart
            and self.mv_part() == other.mv_part()
            and self.section_part() == other.section_part()
        )

    def __hash__(self):
        return hash((self.chart, self.mv, self.section))

    def __repr__(self):
        return f"TwistedElement(mv={self.mv!r}, section={self.section!r})"


def twisted_lambda(
    alg: CoisoAlgebra, elements: Sequence[TwistedElement]
) -> TwistedElement:
    """The twisted multibrackets of W(C, pi) on homogeneous elements.

    The defining values on pure slots are
        lambda_1(X[1]) = (-[pi, X][1], P(X)),
        lambda_1(a)    = (0, P([pi, a])),
        lambda_2(X[1], Y[1]) = (-1)^{|X|} [X, Y][1],
        lambda_n(a_1, ..., a_n) = P([...[pi, a_1], ..., a_n]),
        lambda_{n+1}(X[1], a_1, ..., a_n) = P([...[X, a_1], ..., a_n]),
    and every other slot pattern vanishes.  Mixed arguments expand
    multilinearly with Koszul signs over the W-degrees.
    """
    n = len(elements)
    chart = alg.chart
    result_deg = sum(e.degree for e in elements) + 1
    mv_acc = MultiVectorField.zero(chart, result_deg + 2)
    sec_acc = MultiVectorField.zero(chart, result_deg + 1)
    for combo in itertools.product((0, 1), repeat=n):
        parts = []
        ok = True
        for e, pick in zip(elements, combo):
            part = e.mv if pick == 0 else e.section
            if part is None:
                ok = False
                break
            parts.append(part)
        if not ok:
            continue
        mv_pos = [i for i, pick in enumerate(combo) if pick == 0]
        if len(mv_pos) == 0:
            cur = alg.pi
            for a in parts:
                cur = schouten_bracket(cur, a)
            sec_acc = sec_acc + projection_P(cur)
        elif len(mv_pos) == 1:
            pos = mv_pos[0]
            X = parts[pos]
            if n == 1:
                mv_acc = mv_acc - schouten_bracket(alg.pi, X)
                sec_acc = sec_acc + projection_P(X)
            else:
                koszul = sum(elements[i].degree for i in range(pos)) * elements[
                    pos
                ].degree
                cur = X
                for i, a in enumerate(parts):
                    if i != pos:
                        cur = schouten_bracket(cur, a)
                term = projection_P(cur)
                sec_acc = sec_acc + (term if koszul % 2 == 0 else -term)
        elif len(mv_pos) == 2 and n == 2:
            X, Y = parts
            term = schouten_bracket(X, Y)
            if (X.degree - 1) % 2:
                term = -term
            mv_acc = mv_acc + term
        # three or more multivector slots, or two with sections: zero
    return TwistedElement(
        chart,
        mv=None if mv_acc.is_zero() else mv_acc,
        section=None if sec_acc.is_zero() else as_vertical(sec_acc),
        degree=result_deg,
    )


def twisted_brackets(alg: CoisoAlgebra) -> Callable:
    def family(args):
        return twisted_lambda(alg, list(args))

    return family


def coisotropic_brackets(alg: CoisoAlgebra) -> Callable:
    def family(args):
        return lambda_n(alg, *args)

    return family


def twisted_mc(
    alg: CoisoAlgebra, w: TwistedElement, cap: Optional[int] = None
) -> TwistedElement:
    """Maurer-Cartan series of a W-degree-0 element in the twisted algebra."""
    if w.degree != 0:
        raise ValueError("twisted Maurer-Cartan input must have W-degree 0")
    if cap is None:
        cap = default_exp_cap(alg.pi) + default_exp_cap(w.mv_part()) + 1
    acc = TwistedElement.zero(alg.chart, degree=1)
    fact = Fraction(1)
    for k in range(1, cap + 1):
        fact *= k
        term = twisted_lambda(alg, [w] * k)
        if not term.is_zero():
            acc = acc + term.scale(Fraction(1, fact))
    return acc


# -- higher Jacobi identities ------------------------------------------------------


def _w_degree(x) -> int:
    if isinstance(x, TwistedElement):
        return x.degree
    if isinstance(x, MultiVectorField):
        return x.degree - 1
    raise TypeError(f"no W-degree for {type(x).__name__}")


def _koszul_sign(order: Sequence[int], degrees: Sequence[int]) -> int:
    sign = 1
    for pos_b, b in enumerate(order):
        for a in order[pos_b + 1 :]:
            if a < b and degrees[a] % 2 and degrees[b] % 2:
                sign = -sign
    return sign


def higher_jacobi_verify(family: Callable, inputs: Sequence) -> bool:
    """Check the order-n identity sum over unshuffles of lambda(lambda(...), ...).

    Convention: with all brackets of degree +1 and graded symmetric, the
    relation for n inputs reads

        sum_{i=1}^{n} sum_{(i, n-i)-unshuffles s} eps(s)
            lambda_{n-i+1}(lambda_i(x_{s(1)}, ..), x_{s(i+1)}, ..) = 0,

    where eps is the Koszul sign of the unshuffle on the input degrees.
    """
    n = len(inputs)
    if n > 3:
        raise ValueError("identities are verified through order 3 only")
    degrees = [_w_degree(x) for x in inputs]
    acc = None
    for i in range(1, n + 1):
        for chosen in itertools.combinations(range(n), i):
            rest = tuple(k for k in range(n) if k not in chosen)
            sign = _koszul_sign(chosen + rest, degrees)
            inner = family(tuple(inputs[k] for k in chosen))
            term = family((inner,) + tuple(inputs[k] for k in rest))
            if sign < 0:
                term = -term
            acc = term if acc is None else acc + term
    return acc is None or acc.is_zero()
