"""Exact linear algebra over scalars and ring elements.

Inverses are computed as adjugate over determinant, so the only division
happens once, by the determinant.  A determinant is exactly invertible when
it is a single term (one pi-power for scalars; additionally one monomial and
Fourier mode for ring elements), which covers every matrix this package
needs to invert exactly.
"""

from __future__ import annotations

from typing import Callable, Sequence

from .coeff_ring import RingElement, Scalar
from .errors import DegenerateBivectorError, NonInvertibleScalarError


def _det(mat, zero, is_zero: Callable) -> object:
    """Determinant by column-subset expansion with memoisation."""
    n = len(mat)
    if n == 0:
        raise ValueError("empty matrix")
    cache: dict[tuple[int, int], object] = {}

    def minor(row: int, colmask: int):
        if row == n:
            return None  # multiplicative identity marker
        key = (row, colmask)
        if key in cache:
            return cache[key]
        total = zero
        pos = 0
        for col in range(n):
            if colmask & (1 << col):
                continue
            entry = mat[row][col]
            if not is_zero(entry):
                sub = minor(row + 1, colmask | (1 << col))
                piece = entry if sub is None else entry * sub
                total = total + (piece if pos % 2 == 0 else -piece)
            pos += 1
        cache[key] = total
        return total

    out = minor(0, 0)
    return zero if out is None else out


def scalar_det(mat: Sequence[Sequence[Scalar]]) -> Scalar:
    return _det(mat, Scalar.zero(), lambda s: s.is_zero())


def ring_det(mat: Sequence[Sequence[RingElement]]) -> RingElement:
    chart = mat[0][0].chart
    return _det(mat, RingElement.zero(chart), lambda e: e.is_zero())


def _inverse(mat, det_fn, det_inv, zero):
    n = len(mat)
    out = [[zero for _ in range(n)] for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if n == 1:
                cof = det_inv
            else:
                sub = [
                    [mat[r][c] for c in range(n) if c != j]
                    for r in range(n)
                    if r != i
                ]
                cof = det_fn(sub) * det_inv
            if (i + j) % 2:
                cof = -cof
            out[j][i] = cof
    return out


def scalar_matrix_inverse(mat: Sequence[Sequence[Scalar]]):
    """Exact inverse; requires det to be a single pi-power term."""
    det = scalar_det(mat)
    if det.is_zero():
        raise DegenerateBivectorError("matrix is singular over the scalar ring")
    try:
        dinv = det.inverse()
    except NonInvertibleScalarError as exc:
        raise NonInvertibleScalarError(
            f"determinant {det.render()} has no exact inverse in the ring"
        ) from exc
    return _inverse(mat, scalar_det, dinv, Scalar.zero())


def ring_element_inverse(e: RingElement) -> RingElement:
    """Exact inverse of a single-term ring element c * e^{i 2 pi k.x}."""
    if len(e.terms) != 1:
        raise NonInvertibleScalarError(
            f"{e.render()} is not a single-term element"
        )
    xe, k, ye, s = e.terms[0]
    if any(xe) or any(ye):
        raise NonInvertibleScalarError(
            f"{e.render()} has a monomial factor and no inverse in the ring"
        )
    kinv = tuple(-n for n in k)
    return RingElement(e.chart, ((xe, kinv, ye, s.inverse()),))


def ring_matrix_inverse(mat: Sequence[Sequence[RingElement]]):
    """Exact inverse of a ring matrix whose determinant is invertible."""
    det = ring_det(mat)
    if det.is_zero():
        raise DegenerateBivectorError("matrix is singular over the ring")
    dinv = ring_element_inverse(det)
    return _inverse(mat, ring_det, dinv, RingElement.zero(mat[0][0].chart))


def mat_mul(a, b, zero):
    n, mid, m = len(a), len(b), len(b[0])
    out = [[zero for _ in range(m)] for _ in range(n)]
    for i in range(n):
        for j in range(m):
            acc = zero
            for k in range(mid):
                acc = acc + a[i][k] * b[k][j]
            out[i][j] = acc
    return out
