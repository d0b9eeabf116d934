"""Tests for finitely presented abelian groups.

Oracles used here are deliberately low-tech and share no code with the
implementation: hom counts come from enumerating generator images over
diagonal presentations, canonical forms are cross-checked by counting
subgroup closures inside (Z/N)^g for several N, and kernel/cokernel are
verified elementwise on groups small enough to enumerate.
"""

import itertools
import math
import random

import pytest

from extcalc.exactint import IntMatrix, solve
from extcalc.fpab import (
    DimensionMismatch,
    Element,
    FpAbGroup,
    FpAbHom,
    IllDefined,
    NotEpi,
    NotFree,
    cokernel,
    compose,
    describe,
    direct_sum,
    direct_sum_many,
    free_abelian,
    from_invariants,
    hom_group,
    identity_hom,
    is_epi,
    is_mono,
    kernel,
    lift_through_epi,
    make_group,
    make_hom,
    minimized,
    summand_injection,
    summand_projection,
    zero_hom,
    zmod,
)


# ---------------------------------------------------------------- oracles

def oracle_hom_count(src_moduli, tgt_moduli):
    """Count homs between direct sums of cyclics by enumerating images.

    A hom is a matrix column per source generator; the image of generator i
    must be killed by d_i.  Entry ranges are the target moduli (0 means Z,
    which forces the entry to 0 whenever d_i > 0 and admits no nonzero
    choice in a finite count, so infinite targets only appear with d_i > 0).
    """
    count = 1
    for d in src_moduli:
        per_gen = 1
        for e in tgt_moduli:
            if e == 0:
                if d != 0:
                    per_gen *= 1  # only the zero image is torsion in Z
                else:
                    return None  # Hom(Z, Z) is infinite
            else:
                per_gen *= math.gcd(d, e) if d else e
        count *= per_gen
    return count


def span_size_mod(rel: IntMatrix, n: int) -> int:
    """Order of the subgroup of (Z/n)^g generated by the relation columns."""
    g = rel.rows
    gens = [tuple(rel.entry(i, j) % n for i in range(g)) for j in range(rel.cols)]
    seen = {(0,) * g}
    frontier = [(0,) * g]
    while frontier:
        x = frontier.pop()
        for gv in gens:
            y = tuple((a + b) % n for a, b in zip(x, gv))
            if y not in seen:
                seen.add(y)
                frontier.append(y)
    return len(seen)


def random_group(rng, max_gens=4, span=6) -> FpAbGroup:
    g = rng.randint(0, max_gens)
    k = rng.randint(0, max_gens)
    rel = IntMatrix(g, k, [[rng.randint(-span, span) for _ in range(k)]
                           for _ in range(g)])
    return make_group(g, rel)


def random_finite_group(rng, max_order=24) -> FpAbGroup:
    while True:
        moduli = [rng.choice([2, 2, 3, 4, 6, 8]) for _ in range(rng.randint(1, 3))]
        if math.prod(moduli) <= max_order:
            return from_invariants(0, moduli)


def random_hom(rng, a: FpAbGroup, b: FpAbGroup) -> FpAbHom:
    hg = hom_group(a, b)
    m = IntMatrix.zero(b.gens, a.gens)
    for h in hg.basis:
        m = m + h.matrix.scale(rng.randint(-3, 3))
    return FpAbHom(a, b, m)


# ---------------------------------------------------------------- groups

def test_make_group_examples():
    assert make_group(1, IntMatrix.zero(1, 0)).canonical_form == (1, ())
    g = make_group(2, IntMatrix.from_cols([(2, 0), (0, 3)], rows=2))
    assert g.canonical_form == (0, (6,))
    g = make_group(2, IntMatrix.from_cols([(1, 0)], rows=2))
    assert g.canonical_form == (1, ())
    with pytest.raises(DimensionMismatch):
        make_group(2, IntMatrix.zero(3, 1))


def test_canonical_form_against_mod_n_spans():
    # For any n, the index of the relation span inside (Z/n)^g must equal
    # n^rank * prod(gcd(d_i, n)).  Several n pin down the invariant factors.
    rng = random.Random(2001)
    for _ in range(60):
        g = random_group(rng)
        r, factors = g.canonical_form
        for n in (2, 3, 4, 5, 8, 9):
            index = n ** g.gens // span_size_mod(g.relations, n)
            expected = n ** r * math.prod(math.gcd(d, n) for d in factors)
            assert index == expected


def test_monomial_fast_path_matches_snf():
    # same group presented diagonally and through a unimodular disguise
    rng = random.Random(2002)
    for _ in range(30):
        moduli = [rng.choice([0, 2, 3, 4, 6, 12]) for _ in range(rng.randint(1, 3))]
        diag = from_invariants(sum(1 for m in moduli if m == 0),
                               [m for m in moduli if m])
        g = len(moduli)
        cols = [[moduli[i] if i == j else 0 for i in range(g)]
                for j in range(g) if moduli[j]]
        rel = IntMatrix.from_cols(cols, rows=g)
        mono = make_group(g, rel)
        assert mono._row_moduli is not None
        # disguise: mix rows with a random unimodular transform
        u = IntMatrix.identity(g)
        for _ in range(4):
            i, j = rng.randrange(g), rng.randrange(g)
            if i != j:
                bump = IntMatrix(g, g, [[1 if a == b else
                                         (rng.randint(-2, 2) if (a, b) == (i, j) else 0)
                                         for b in range(g)] for a in range(g)])
                u = u * bump
        mixed = make_group(g, u * rel)
        assert mono.canonical_form == mixed.canonical_form == diag.canonical_form


def test_describe():
    assert describe(make_group(0, IntMatrix.zero(0, 0))) == "0"
    assert describe(free_abelian(1)) == "Z"
    assert describe(from_invariants(2, [2, 6])) == "Z^2 + Z/2 + Z/6"
    assert describe(zmod(5)) == "Z/5"


def test_order_and_trivial():
    assert zmod(6).order() == 6
    assert free_abelian(1).order() is None
    assert make_group(0, IntMatrix.zero(0, 0)).is_trivial()
    assert zmod(1).is_trivial()
    assert from_invariants(0, [2, 3]).order() == 6


def test_element_reduction_is_canonical():
    rng = random.Random(2003)
    for _ in range(40):
        g = random_group(rng)
        if g.gens == 0:
            continue
        x = IntMatrix.column([rng.randint(-20, 20) for _ in range(g.gens)])
        shift = IntMatrix.zero(g.gens, 1)
        for j in range(g.relations.cols):
            shift = shift + g.relations.column_matrix(j).scale(rng.randint(-3, 3))
        assert g.reduce(x) == g.reduce(x + shift)
        # the reduction stays in the same coset
        assert g.contains_zero(g.reduce(x) - x)


def test_element_arithmetic():
    g = zmod(6)
    a = g.element([7])
    b = g.element([1])
    assert a == b
    assert (a + b) == g.element([2])
    assert (a - b).is_zero()
    assert (-a) == g.element([5])
    assert a.scale(6).is_zero()
    assert len(list(g.elements())) == 6
    assert len(set(g.elements())) == 6


def test_elements_enumeration_nondiagonal():
    g = make_group(2, IntMatrix.from_cols([(2, 1), (0, 4)], rows=2))
    elems = list(g.elements())
    assert len(elems) == 8 and len(set(elems)) == 8
    assert g.order() == 8


# ---------------------------------------------------------------- homs

def test_make_hom_examples():
    z = free_abelian(1)
    assert make_hom(z, z, IntMatrix.from_rows([[2]])) is not None
    with pytest.raises(IllDefined):
        make_hom(zmod(2), zmod(4), IntMatrix.from_rows([[1]]))
    make_hom(zmod(2), zmod(4), IntMatrix.from_rows([[2]]))
    with pytest.raises(DimensionMismatch):
        make_hom(z, z, IntMatrix.zero(2, 1))


def test_hom_equality_mod_relations():
    f = make_hom(zmod(2), zmod(4), IntMatrix.from_rows([[2]]))
    g = make_hom(zmod(2), zmod(4), IntMatrix.from_rows([[6]]))
    h = make_hom(zmod(2), zmod(4), IntMatrix.from_rows([[0]]))
    assert f == g
    assert f != h
    assert h.is_zero()


def test_hom_evaluation_and_composition():
    q = make_hom(free_abelian(1), zmod(2), IntMatrix.from_rows([[1]]))
    dbl = make_hom(free_abelian(1), free_abelian(1), IntMatrix.from_rows([[2]]))
    assert compose(q, dbl).is_zero()
    x = free_abelian(1).element([3])
    assert q(x) == zmod(2).element([1])
    assert identity_hom(zmod(6))(zmod(6).element([4])) == zmod(6).element([4])
    assert zero_hom(zmod(4), zmod(2))(zmod(4).element([1])).is_zero()


def test_hom_group_frozen_examples():
    assert hom_group(zmod(2), free_abelian(1)).group.is_trivial()
    hg = hom_group(free_abelian(1), from_invariants(1, [4]))
    assert hg.group.canonical_form == (1, (4,))
    assert hom_group(zmod(4), zmod(6)).group.canonical_form == (0, (2,))


def test_hom_group_counts_match_brute_force():
    rng = random.Random(2004)
    cases = [
        ([2], [4]), ([4], [6]), ([2, 4], [8]), ([6], [2, 3]),
        ([2, 2], [2, 4]), ([3], [9, 3]), ([8], [2]), ([12], [18]),
    ]
    for src, tgt in cases:
        a = from_invariants(0, src)
        b = from_invariants(0, tgt)
        hg = hom_group(a, b)
        assert hg.group.order() == oracle_hom_count(src, tgt)
    # free sources: Hom(Z^r, B) = B^r
    hg = hom_group(free_abelian(2), from_invariants(1, [3]))
    assert hg.group.canonical_form == (2, (3, 3))


def test_hom_group_count_invariant_under_presentation():
    rng = random.Random(2005)
    for _ in range(20):
        a = random_finite_group(rng, max_order=12)
        b = random_finite_group(rng, max_order=12)
        # disguise a with a redundant generator
        g = a.gens + 1
        cols = [list(a.relations.col(j)) + [0] for j in range(a.relations.cols)]
        cols.append([0] * a.gens + [1])
        disguised = make_group(g, IntMatrix.from_cols(cols, rows=g))
        assert hom_group(disguised, b).group.canonical_form == \
            hom_group(a, b).group.canonical_form


def test_hom_group_basis_spans_all_homs():
    # every well-defined generator assignment is reachable from the basis
    a = from_invariants(0, [2, 4])
    b = from_invariants(0, [4])
    hg = hom_group(a, b)
    found = set()
    for e in hg.group.elements():
        h = hg.hom_of(e)
        found.add(h.reduced_matrix())
        back = hg.coords_of(h)
        assert back == e
    # oracle: entries (x, y) with 2x = 0, 4y = 0 in Z/4
    expected = {(x, y) for x in (0, 2) for y in range(4)}
    assert {(m.entry(0, 0), m.entry(0, 1)) for m in found} == expected


def test_hom_group_zero_endpoints():
    zero = make_group(0, IntMatrix.zero(0, 0))
    assert hom_group(zero, zmod(4)).group.is_trivial()
    assert hom_group(zmod(4), zero).group.is_trivial()


# ---------------------------------------------------------------- kernel / cokernel

def test_kernel_examples():
    z = free_abelian(1)
    k, incl = kernel(make_hom(z, z, IntMatrix.from_rows([[2]])))
    assert k.is_trivial()
    k, incl = kernel(make_hom(z, zmod(2), IntMatrix.from_rows([[1]])))
    assert k.canonical_form == (1, ())
    assert abs(incl.matrix.entry(0, 0)) == 2
    a = from_invariants(0, [6])
    k, incl = kernel(zero_hom(a, zmod(4)))
    assert k.canonical_form == a.canonical_form
    assert is_mono(incl)


def test_cokernel_examples():
    z = free_abelian(1)
    c, proj = cokernel(make_hom(z, z, IntMatrix.from_rows([[2]])))
    assert c.canonical_form == (0, (2,))
    c, _ = cokernel(identity_hom(z))
    assert c.is_trivial()
    c, proj = cokernel(make_hom(z, zmod(6), IntMatrix.from_rows([[4]])))
    assert c.canonical_form == (0, (2,))
    assert is_epi(proj)


def test_kernel_cokernel_elementwise():
    rng = random.Random(2006)
    for _ in range(15):
        a = random_finite_group(rng)
        b = random_finite_group(rng)
        f = random_hom(rng, a, b)
        k, incl = kernel(f)
        assert compose(f, incl).is_zero()
        killed = {x.coords for x in a.elements() if f(x).is_zero()}
        image_of_k = {incl(e).coords for e in k.elements()}
        assert image_of_k == killed
        assert k.order() == len(killed)

        c, proj = cokernel(f)
        assert compose(proj, f).is_zero()
        assert is_epi(proj)
        image = {f(x).coords for x in a.elements()}
        assert c.order() * len(image) == b.order()
        # proj identifies exactly the image cosets
        reps = {proj(y).coords for y in b.elements()}
        assert len(reps) == c.order()


def test_is_epi_is_mono_examples():
    z = free_abelian(1)
    dbl = make_hom(z, z, IntMatrix.from_rows([[2]]))
    assert is_mono(dbl) and not is_epi(dbl)
    q = make_hom(z, zmod(2), IntMatrix.from_rows([[1]]))
    assert is_epi(q) and not is_mono(q)
    h = make_hom(zmod(4), zmod(4), IntMatrix.from_rows([[2]]))
    assert not is_epi(h) and not is_mono(h)
    assert is_epi(identity_hom(zmod(6))) and is_mono(identity_hom(zmod(6)))


# ---------------------------------------------------------------- lifting

def test_lift_through_epi_examples():
    z = free_abelian(1)
    p = make_hom(z, zmod(2), IntMatrix.from_rows([[1]]))
    h = lift_through_epi(p, p)
    assert compose(p, h) == p
    h0 = lift_through_epi(p, zero_hom(z, zmod(2)))
    assert compose(p, h0).is_zero()

    z2 = free_abelian(2)
    add = make_hom(z2, z, IntMatrix.from_rows([[1, 2]]))
    sec = lift_through_epi(add, identity_hom(z))
    assert compose(add, sec) == identity_hom(z)

    with pytest.raises(NotFree):
        lift_through_epi(p, make_hom(zmod(2), zmod(2), IntMatrix.identity(1)))
    with pytest.raises(NotEpi):
        lift_through_epi(make_hom(z, z, IntMatrix.from_rows([[2]])),
                         identity_hom(z))


def test_lift_through_epi_random():
    rng = random.Random(2007)
    for _ in range(15):
        b = random_finite_group(rng, max_order=16)
        # cover with a superfluous free summand to keep p interesting
        s = direct_sum(free_abelian(1), b)
        p = s.pr_b
        assert is_epi(p)
        f = free_abelian(rng.randint(1, 2))
        g = random_hom(rng, f, b)
        h = lift_through_epi(p, g)
        assert compose(p, h) == g


# ---------------------------------------------------------------- sums

def test_direct_sum_examples():
    s = direct_sum(free_abelian(1), zmod(2))
    assert s.group.canonical_form == (1, (2,))
    s = direct_sum(zmod(2), zmod(3))
    assert s.group.canonical_form == (0, (6,))
    a = from_invariants(1, [4])
    s = direct_sum(a, make_group(0, IntMatrix.zero(0, 0)))
    assert s.group.canonical_form == a.canonical_form


def test_biproduct_identities():
    a, b = from_invariants(0, [4]), from_invariants(1, [2])
    s = direct_sum(a, b)
    group, in_a, in_b, pr_a, pr_b = s
    assert compose(pr_a, in_a) == identity_hom(a)
    assert compose(pr_b, in_b) == identity_hom(b)
    assert compose(pr_a, in_b).is_zero()
    assert compose(pr_b, in_a).is_zero()
    total = compose(in_a, pr_a) + compose(in_b, pr_b)
    assert total == identity_hom(group)


def test_direct_sum_many():
    parts = [zmod(2), free_abelian(1), zmod(3)]
    total, offsets = direct_sum_many(parts)
    assert offsets == [0, 1, 2]
    assert total.canonical_form == (1, (6,))
    acc = None
    for i in range(3):
        inj = summand_injection(total, parts, offsets, i)
        prj = summand_projection(total, parts, offsets, i)
        assert compose(prj, inj) == identity_hom(parts[i])
        term = compose(inj, prj)
        acc = term if acc is None else acc + term
    assert acc == identity_hom(total)
    empty, off = direct_sum_many([])
    assert empty.is_trivial() and off == []


# ---------------------------------------------------------------- minimized

def test_minimized_roundtrip():
    rng = random.Random(2008)
    for _ in range(30):
        g = random_group(rng)
        small, to_small, from_small = minimized(g)
        assert small.canonical_form == g.canonical_form
        assert small.gens == small.rank + len(small.invariant_factors)
        assert compose(to_small, from_small) == identity_hom(small)
        assert compose(from_small, to_small) == identity_hom(g)
