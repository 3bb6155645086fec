"""Shared machinery for wedge-indexed objects with RingElement coefficients.

Both multivector fields and differential forms are finite maps from strictly
increasing tuples of direction indices (base directions first, then fibre
directions, in chart order) to ring elements.  This module holds the common
container plus the sign bookkeeping for wedge products.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .coeff_ring import ChartSpec, RingElement, Scalar
from .errors import ChartMismatchError


def merge_dirs(a: tuple, b: tuple) -> Optional[tuple[int, tuple]]:
    """Merge two ascending index tuples; (sign, merged) or None on collision."""
    if set(a) & set(b):
        return None
    inversions = 0
    for x in a:
        for y in b:
            if y < x:
                inversions += 1
    merged = tuple(sorted(a + b))
    return (-1 if inversions % 2 else 1), merged


def remove_dir(dirs: tuple, pos: int) -> tuple[int, tuple]:
    """Left-derivative sign and remaining tuple after removing position pos."""
    return (-1 if pos % 2 else 1), dirs[:pos] + dirs[pos + 1 :]


class GradedTerms:
    """Homogeneous graded object: degree plus wedge-indexed coefficients."""

    __slots__ = ("chart", "degree", "terms")

    def __init__(self, chart: ChartSpec, degree: int, terms):
        acc: dict[tuple, RingElement] = {}
        for dirs, coeff in terms:
            dirs = tuple(dirs)
            if len(dirs) != degree:
                raise ValueError(f"wedge {dirs} does not have degree {degree}")
            if any(dirs[i] >= dirs[i + 1] for i in range(len(dirs) - 1)):
                raise ValueError(f"wedge indices must be strictly increasing: {dirs}")
            if dirs in acc:
                acc[dirs] = acc[dirs] + coeff
            else:
                acc[dirs] = coeff
        self.chart = chart
        self.degree = degree
        self.terms = tuple(
            sorted((d, c) for d, c in acc.items() if not c.is_zero())
        )

    # -- queries ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, dirs: Iterable[int]) -> RingElement:
        dirs = tuple(dirs)
        for d, c in self.terms:
            if d == dirs:
                return c
        return RingElement.zero(self.chart)

    def support_names(self) -> frozenset:
        out = frozenset()
        for _, c in self.terms:
            out |= c.support_names()
        return out

    def max_y_degree(self) -> int:
        return max((c.y_degree() for _, c in self.terms), default=0)

    def jet_order(self) -> Optional[int]:
        """Reliable fibre order: None when exact, else the minimum over terms."""
        orders = [c.jet_order for _, c in self.terms if c.jet_order is not None]
        return min(orders) if orders else None

    # -- arithmetic --------------------------------------------------------

    def _check(self, other):
        if self.chart != other.chart:
            raise ChartMismatchError(
                f"operands live on different charts: {self.chart} vs {other.chart}"
            )

    def __add__(self, other):
        if not isinstance(other, GradedTerms):
            return NotImplemented
        self._check(other)
        if self._base_kind() is not other._base_kind():
            raise TypeError("cannot add objects of different graded kinds")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise ValueError(
                f"cannot add degree {self.degree} and degree {other.degree}"
            )
        cls = self._base_kind()
        return cls(self.chart, self.degree, self.terms + other.terms)

    def __neg__(self):
        cls = self._base_kind()
        return cls(self.chart, self.degree, ((d, -c) for d, c in self.terms))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s):
        """Multiply every coefficient by a ring element or scalar."""
        cls = self._base_kind()
        if isinstance(s, RingElement):
            return cls(self.chart, self.degree, ((d, c * s) for d, c in self.terms))
        s = Scalar.of(s)
        return cls(self.chart, self.degree, ((d, c.scale(s)) for d, c in self.terms))

    def __mul__(self, s):
        if isinstance(s, (int, Fraction, Scalar, RingElement)):
            return self.scale(s)
        return NotImplemented

    __rmul__ = __mul__

    def wedge(self, other):
        if not isinstance(other, GradedTerms):
            raise TypeError(f"cannot wedge with {type(other).__name__}")
        self._check(other)
        if self._base_kind() is not other._base_kind():
            raise TypeError("cannot wedge a multivector with a form")
        out = []
        for d1, c1 in self.terms:
            for d2, c2 in other.terms:
                m = merge_dirs(d1, d2)
                if m is None:
                    continue
                sign, dirs = m
                prod = c1 * c2
                out.append((dirs, prod if sign > 0 else -prod))
        cls = self._base_kind()
        return cls(self.chart, self.degree + other.degree, out)

    def __xor__(self, other):
        return self.wedge(other)

    def map_coefficients(self, fn):
        cls = self._base_kind()
        return cls(self.chart, self.degree, ((d, fn(c)) for d, c in self.terms))

    def at_zero_fibre(self):
        """Evaluate all coefficients at y = 0 (keep the wedge structure)."""
        return self.map_coefficients(lambda c: c.at_zero_fibre())

    def truncate(self, order: int):
        return self.map_coefficients(lambda c: c.truncate(order))

    def without_truncation(self):
        return self.map_coefficients(lambda c: c.without_truncation())

    def _base_kind(self):
        raise NotImplementedError

    # -- structure -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, GradedTerms):
            return NotImplemented
        if self._base_kind() is not other._base_kind():
            return NotImplemented
        if self.chart != other.chart:
            return False
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self):
        return hash((self.chart, self.terms))

    def render(self) -> str:
        if self.is_zero():
            return "0"
        sym = self._symbol_prefix()
        pieces = []
        for dirs, coeff in self.terms:
            wedge = " /\\ ".join(sym + self.chart.direction_name(d) for d in dirs)
            text = coeff.render()
            if not wedge:
                pieces.append(text)
            elif text == "1":
                pieces.append(wedge)
            elif text == "-1":
                pieces.append(f"-{wedge}")
            elif " " in text or "+" in text.lstrip("-"):
                pieces.append(f"({text}) * {wedge}")
            else:
                pieces.append(f"{text} * {wedge}")
        return " + ".join(pieces)

    def _symbol_prefix(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.render()})"
