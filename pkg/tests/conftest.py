"""Shared deterministic generators for the randomized algebra tests."""

import itertools
import random
from fractions import Fraction

from coisokit import (
    MultiVectorField,
    RingElement,
    Scalar,
    VerticalSection,
    as_vertical,
    make_chart,
)


def rand_fraction(rng, lo=-3, hi=3):
    num = rng.randint(lo, hi)
    den = rng.choice((1, 1, 2, 3))
    return Fraction(num, den)


def rand_ring(rng, chart, max_xdeg=2, max_mode=2, max_ydeg=2, nterms=2, real=True):
    """Random element: polynomial x fourier x fibre-monomial terms."""
    out = RingElement.zero(chart)
    poly_names = [chart.base[i] for i in chart.poly_axes]
    per_names = [chart.base[i] for i in chart.periodic_axes]
    for _ in range(nterms):
        t = RingElement.constant(chart, rand_fraction(rng))
        for nm in poly_names:
            e = rng.randint(0, max_xdeg)
            if e and rng.random() < 0.5:
                t = t * RingElement.coordinate(chart, nm) ** e
        for nm in per_names:
            if rng.random() < 0.4:
                k = rng.randint(1, max_mode)
                maker = RingElement.cos_of if rng.random() < 0.5 else RingElement.sin_of
                t = t * maker(chart, {nm: k})
        for nm in chart.fibre:
            e = rng.randint(0, max_ydeg)
            if e and rng.random() < 0.5:
                t = t * RingElement.coordinate(chart, nm) ** e
        if not real and rng.random() < 0.5:
            t = t.scale(Scalar.imag_unit())
        out = out + t
    return out


def rand_base_ring(rng, chart, **kw):
    kw.setdefault("max_ydeg", 0)
    return rand_ring(rng, chart, **kw)


def rand_multivector(rng, chart, degree, nterms=2, **kw):
    keys = list(itertools.combinations(range(chart.n_dirs), degree))
    out = MultiVectorField.zero(chart, degree)
    for _ in range(nterms):
        key = rng.choice(keys)
        out = out + MultiVectorField(chart, degree, ((key, rand_ring(rng, chart, **kw)),))
    return out


def rand_section(rng, chart, degree=1, nterms=2, **kw):
    keys = list(
        itertools.combinations(range(chart.n_base, chart.n_dirs), degree)
    )
    out = MultiVectorField.zero(chart, degree)
    for _ in range(nterms):
        key = rng.choice(keys)
        coeff = rand_base_ring(rng, chart, **kw)
        out = out + MultiVectorField(chart, degree, ((key, coeff),))
    return as_vertical(out)


def rand_poisson_disjoint(rng, chart):
    """Poisson bivector with P = 0: disjoint wedge pairs, inert coefficients.

    Every wedge pair keeps a base direction and each coefficient depends only
    on coordinates outside all pairs, so the Jacobi identity holds exactly.
    """
    dirs = list(range(chart.n_dirs))
    rng.shuffle(dirs)
    pairs = []
    while len(dirs) >= 2 and len(pairs) < 2:
        a, b = dirs.pop(), dirs.pop()
        if a > b:
            a, b = b, a
        if a >= chart.n_base:  # keep the pair off the pure-fibre block
            continue
        pairs.append((a, b))
    inert = [d for d in range(chart.n_dirs) if all(d not in p for p in pairs)]
    out = MultiVectorField.zero(chart, 2)
    for pair in pairs:
        coeff = RingElement.constant(chart, rand_fraction(rng) + Fraction(1))
        for d in inert:
            nm = chart.direction_name(d)
            if chart.is_periodic_dir(d):
                if rng.random() < 0.5:
                    coeff = coeff * RingElement.cos_of(chart, {nm: 1})
            elif rng.random() < 0.5:
                coeff = coeff * RingElement.coordinate(chart, nm) ** rng.randint(1, 2)
        out = out + MultiVectorField(chart, 2, ((pair, coeff),))
    return out


def zero_section(chart):
    return VerticalSection.from_components(
        chart, [RingElement.zero(chart)] * chart.n_fibre
    )


def small_chart():
    return make_chart("x1 x2*", "y1 y2")


def rng_for(name: str) -> random.Random:
    # str seeds hash deterministically across processes, unlike hash()
    return random.Random(name)
