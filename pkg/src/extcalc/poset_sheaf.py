"""Abelian presheaves on finite posets and their sheaf Ext.

A presheaf assigns a finitely presented abelian group to every element
and a restriction hom to every related pair, downward.  Free presheaves
are sums of representables ZY(c): the integers on the principal down-set
of c.  Hom(ZY(c), F) is evaluation at c, which makes representables
projective for the external theory and drives the resolution machinery.

Sheaf Ext is computed stalkwise: the stalk at c is Ext over the down-set
below c, and the restriction maps come from comparison lifts between the
down-set resolutions.  On sites where principal down-sets intersect in
principal down-sets (chains, trees) restricted representables stay free,
so one full-site resolution pushed through the internal hom computes the
same presheaf; both paths are exposed and cross-checked.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Optional, Sequence, Tuple

from .exactint import (
    IntMatrix,
    ModSolver,
    block_diag,
    hstack,
    vstack,
)
from . import fpab
from .fpab import (
    Element,
    FpAbGroup,
    FpAbHom,
    IllDefined,
    NotEpi,
    NotFree,
    free_abelian,
    identity_hom,
    zmod,
)
from . import resolution
from .resolution import FreeResolution, ModuleContext


class PosetError(ValueError):
    """An order relation fails reflexivity, antisymmetry, or transitivity."""


class SiteMismatch(ValueError):
    """Two presheaves or homs live on different posets."""


class FinitePoset:
    """Elements 0..n-1 with a full order-relation matrix.

    leq[d][c] records d <= c.  The three order laws are checked
    exhaustively at construction and a violation names its witnesses.
    """

    __slots__ = ("size", "leq")

    def __init__(self, leq: Sequence[Sequence[bool]]):
        rows = tuple(tuple(bool(x) for x in row) for row in leq)
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise PosetError("order relation matrix is not square")
        for i in range(n):
            if not rows[i][i]:
                raise PosetError(f"reflexivity fails at element {i}")
        for i in range(n):
            for j in range(n):
                if i != j and rows[i][j] and rows[j][i]:
                    raise PosetError(f"antisymmetry fails at ({i}, {j})")
        for i in range(n):
            for j in range(n):
                if not rows[i][j]:
                    continue
                for k in range(n):
                    if rows[j][k] and not rows[i][k]:
                        raise PosetError(
                            f"transitivity fails at ({i}, {j}, {k})")
        self.size = n
        self.leq = rows

    def elements(self) -> range:
        return range(self.size)

    def is_leq(self, d: int, c: int) -> bool:
        return self.leq[d][c]

    def strict_pairs(self) -> List[Tuple[int, int]]:
        """All pairs (d, c) with d < c, in lexicographic order."""
        return [(d, c) for d in range(self.size) for c in range(self.size)
                if d != c and self.leq[d][c]]

    def down_set(self, c: int) -> Tuple[int, ...]:
        return tuple(d for d in range(self.size) if self.leq[d][c])

    def induced(self, elems: Sequence[int]) -> "FinitePoset":
        elems = list(elems)
        return FinitePoset([[self.leq[a][b] for b in elems] for a in elems])

    def down_poset(self, c: int) -> Tuple["FinitePoset", Tuple[int, ...]]:
        """The sub-poset below c together with its global element list."""
        elems = self.down_set(c)
        return self.induced(elems), elems

    def top(self) -> Optional[int]:
        for c in range(self.size):
            if all(self.leq[d][c] for d in range(self.size)):
                return c
        return None

    def __eq__(self, other) -> bool:
        return isinstance(other, FinitePoset) and self.leq == other.leq

    def __hash__(self) -> int:
        return hash(self.leq)

    def __repr__(self) -> str:
        return f"FinitePoset(size={self.size})"


def make_poset(n: int, relations: Sequence[Tuple[int, int]]) -> FinitePoset:
    """Poset from generating pairs (d, c) meaning d <= c, closed off.

    The reflexive-transitive closure is computed first; antisymmetry
    failures (cycles in the generators) are then reported by validation.
    """
    leq = [[i == j for j in range(n)] for i in range(n)]
    for (d, c) in relations:
        if not (0 <= d < n and 0 <= c < n):
            raise PosetError(f"relation ({d}, {c}) is out of range")
        leq[d][c] = True
    for k in range(n):
        for i in range(n):
            if leq[i][k]:
                row_k = leq[k]
                row_i = leq[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return FinitePoset(leq)


def chain(n: int) -> FinitePoset:
    return FinitePoset([[d <= c for c in range(n)] for d in range(n)])


def bowtie() -> FinitePoset:
    """z below two middles, both below two tops: z < m1, m2 < p, q.

    The intersection of the principal down-sets of p and q is
    {z, m1, m2}, which has no maximum.
    """
    return make_poset(5, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4)])


class AbPresheaf:
    """Per-element stalks plus one restriction hom per related pair.

    maps[(d, c)] is the restriction F(c) -> F(d) for each strict pair
    d < c; the identity pairs are implicit.  Functoriality over every
    composable triple is checked at construction, which removes any
    path-composition ambiguity later.  free_labels marks presheaves
    realized from a sum of representables and records the summand list.
    """

    __slots__ = ("site", "stalks", "maps", "free_labels")

    def __init__(self, site: FinitePoset, stalks: Sequence[FpAbGroup],
                 res: Dict[Tuple[int, int], FpAbHom], check: bool = True,
                 free_labels: Optional[Tuple[int, ...]] = None):
        stalks = tuple(stalks)
        if len(stalks) != site.size:
            raise IllDefined("need exactly one stalk per element")
        maps = {}
        for (d, c), h in res.items():
            if not site.is_leq(d, c):
                raise IllDefined(f"restriction given for unrelated ({d}, {c})")
            if d == c:
                if check and h != identity_hom(stalks[c]):
                    raise IllDefined(f"restriction at ({c}, {c}) is not "
                                     "the identity")
                continue
            maps[(d, c)] = h
        for (d, c) in site.strict_pairs():
            if (d, c) not in maps:
                raise IllDefined(f"missing restriction for ({d}, {c})")
            h = maps[(d, c)]
            if h.src != stalks[c] or h.tgt != stalks[d]:
                raise IllDefined(f"restriction for ({d}, {c}) has wrong "
                                 "endpoints")
        if check:
            for (d, c) in site.strict_pairs():
                for e in range(site.size):
                    if e != d and site.is_leq(e, d):
                        lhs = fpab.compose(maps[(e, d)], maps[(d, c)])
                        if lhs != maps[(e, c)]:
                            raise IllDefined(
                                "restrictions do not compose along "
                                f"({e}, {d}, {c})")
        self.site = site
        self.stalks = stalks
        self.maps = maps
        self.free_labels = free_labels

    def stalk(self, c: int) -> FpAbGroup:
        return self.stalks[c]

    def res(self, d: int, c: int) -> FpAbHom:
        if d == c:
            return identity_hom(self.stalks[c])
        return self.maps[(d, c)]

    def restrict(self, elems: Sequence[int]) -> "AbPresheaf":
        """The induced presheaf on a subset of elements (local reindexing)."""
        elems = tuple(elems)
        sub = self.site.induced(elems)
        stalks = [self.stalks[e] for e in elems]
        res = {(i, j): self.maps[(elems[i], elems[j])]
               for (i, j) in sub.strict_pairs()}
        return AbPresheaf(sub, stalks, res, check=False)

    def is_zero(self) -> bool:
        return all(s.is_trivial() for s in self.stalks)

    def __eq__(self, other) -> bool:
        return (isinstance(other, AbPresheaf) and self.site == other.site
                and self.stalks == other.stalks and self.maps == other.maps)

    def __hash__(self) -> int:
        return hash((self.site, self.stalks, tuple(sorted(self.maps.items()))))

    def __repr__(self) -> str:
        inner = ", ".join(fpab.describe(s) for s in self.stalks)
        return f"AbPresheaf[{inner}]"


class PresheafHom:
    """Natural family of stalk homs, one per element."""

    __slots__ = ("src", "tgt", "components")

    def __init__(self, src: AbPresheaf, tgt: AbPresheaf,
                 components: Sequence[FpAbHom], check: bool = True):
        if src.site != tgt.site:
            raise SiteMismatch("source and target live on different posets")
        components = tuple(components)
        if len(components) != src.site.size:
            raise IllDefined("need exactly one component per element")
        for c, h in enumerate(components):
            if h.src != src.stalk(c) or h.tgt != tgt.stalk(c):
                raise IllDefined(f"component at {c} has wrong endpoints")
        if check:
            for (d, c) in src.site.strict_pairs():
                lhs = fpab.compose(components[d], src.res(d, c))
                rhs = fpab.compose(tgt.res(d, c), components[c])
                if lhs != rhs:
                    raise IllDefined(f"naturality fails at pair ({d}, {c})")
        self.src = src
        self.tgt = tgt
        self.components = components

    def component(self, c: int) -> FpAbHom:
        return self.components[c]

    def __eq__(self, other) -> bool:
        return (isinstance(other, PresheafHom) and self.src == other.src
                and self.tgt == other.tgt
                and self.components == other.components)

    def __hash__(self) -> int:
        return hash((self.src, self.tgt, self.components))

    def __repr__(self) -> str:
        return f"PresheafHom({self.src!r} -> {self.tgt!r})"


def _compose(f: PresheafHom, g: PresheafHom) -> PresheafHom:
    return PresheafHom(g.src, f.tgt,
                       [fpab.compose(f.components[c], g.components[c])
                        for c in range(f.src.site.size)], check=False)


def _restrict_hom(h: PresheafHom, elems: Sequence[int],
                  src: Optional[AbPresheaf] = None,
                  tgt: Optional[AbPresheaf] = None) -> PresheafHom:
    if src is None:
        src = h.src.restrict(elems)
    if tgt is None:
        tgt = h.tgt.restrict(elems)
    return PresheafHom(src, tgt, [h.components[e] for e in elems],
                       check=False)


def is_epi(h: PresheafHom) -> bool:
    """Stalkwise surjectivity."""
    return all(fpab.is_epi(comp) for comp in h.components)


def is_mono(h: PresheafHom) -> bool:
    return all(fpab.is_mono(comp) for comp in h.components)


def zero_presheaf(site: FinitePoset) -> AbPresheaf:
    zero = fpab.make_group(0)
    res = {(d, c): fpab.zero_hom(zero, zero) for (d, c) in site.strict_pairs()}
    return AbPresheaf(site, [zero] * site.size, res, check=False)


class FreePresheaf:
    """A formal sum of representables ZY(c), one per entry of labels.

    The stalk at d of the realization is Z^k on the summands whose label
    lies above d, with coordinate order inherited from the label order;
    restrictions are coordinate inclusions since the supports shrink
    going up.
    """

    __slots__ = ("site", "labels", "_realized")

    def __init__(self, site: FinitePoset, labels: Sequence[int]):
        labels = tuple(labels)
        for l in labels:
            if not 0 <= l < site.size:
                raise IllDefined(f"label {l} is not a poset element")
        self.site = site
        self.labels = labels
        self._realized = None

    def support(self, d: int) -> List[int]:
        return [i for i, l in enumerate(self.labels)
                if self.site.is_leq(d, l)]

    def realize(self) -> AbPresheaf:
        if self._realized is None:
            site = self.site
            sups = [self.support(d) for d in site.elements()]
            stalks = [free_abelian(len(s)) for s in sups]
            res = {}
            for (d, c) in site.strict_pairs():
                rows = []
                for i in sups[d]:
                    rows.append([1 if i == j else 0 for j in sups[c]])
                res[(d, c)] = FpAbHom(stalks[c], stalks[d],
                                      IntMatrix.from_rows(rows,
                                                          cols=len(sups[c])),
                                      check=False)
            self._realized = AbPresheaf(site, stalks, res, check=False,
                                        free_labels=self.labels)
        return self._realized

    def __eq__(self, other) -> bool:
        return (isinstance(other, FreePresheaf) and self.site == other.site
                and self.labels == other.labels)

    def __hash__(self) -> int:
        return hash((self.site, self.labels))

    def __repr__(self) -> str:
        return f"FreePresheaf(labels={self.labels})"


def free_presheaf(site: FinitePoset, c: int) -> AbPresheaf:
    """ZY(c): the integers on the principal down-set of c."""
    if not 0 <= c < site.size:
        raise IllDefined(f"element {c} is not in the poset")
    return FreePresheaf(site, (c,)).realize()


# ------------------------------------------------------------------ hom

class PresheafHomGroup:
    """The group of natural families F -> G.

    Presented as the kernel of the stacked naturality constraints inside
    the direct sum of the stalkwise hom groups.  Coordinates convert to
    and from PresheafHom values through hom_of and coords_of.
    """

    __slots__ = ("src_presheaf", "tgt_presheaf", "hgs", "ambient", "offsets",
                 "incl", "group", "_solver", "_basis")

    def __init__(self, F: AbPresheaf, G: AbPresheaf):
        if F.site != G.site:
            raise SiteMismatch("hom needs presheaves on one site")
        site = F.site
        hgs = [fpab.hom_group(F.stalk(c), G.stalk(c))
               for c in site.elements()]
        ambient, offsets = fpab.direct_sum_many([hg.group for hg in hgs])
        pairs = site.strict_pairs()
        if pairs:
            strips = []
            tgt_groups = []
            for (d, c) in pairs:
                hdc = fpab.hom_group(F.stalk(c), G.stalk(d))
                tgt_groups.append(hdc.group)
                post = fpab.induced_hom_group_map(
                    hgs[c], hdc,
                    lambda h, rg=G.res(d, c): fpab.compose(rg, h))
                pre = fpab.induced_hom_group_map(
                    hgs[d], hdc,
                    lambda h, rf=F.res(d, c): fpab.compose(h, rf))
                blocks = [IntMatrix.zero(hdc.group.gens, hgs[e].group.gens)
                          for e in site.elements()]
                blocks[c] = blocks[c] + post.matrix
                blocks[d] = blocks[d] - pre.matrix
                strips.append(hstack(*blocks))
            total, _ = fpab.direct_sum_many(tgt_groups)
            constraint = FpAbHom(ambient, total, vstack(*strips), check=False)
            group, incl = fpab.kernel(constraint)
        else:
            group, incl = ambient, identity_hom(ambient)
        self.src_presheaf = F
        self.tgt_presheaf = G
        self.hgs = hgs
        self.ambient = ambient
        self.offsets = offsets
        self.incl = incl
        self.group = group
        self._solver = None
        self._basis = None

    def hom_of(self, coords) -> PresheafHom:
        if isinstance(coords, Element):
            coords = coords.coords
        amb = self.incl.matrix * coords
        comps = []
        for c, hg in enumerate(self.hgs):
            off = self.offsets[c]
            block = IntMatrix.column([amb.entry(off + r, 0)
                                      for r in range(hg.group.gens)])
            comps.append(hg.hom_of(block))
        return PresheafHom(self.src_presheaf, self.tgt_presheaf, comps,
                           check=False)

    def coords_of(self, ph: PresheafHom) -> Element:
        vals = []
        for c, hg in enumerate(self.hgs):
            vals.extend(hg.coords_of(ph.components[c]).coords.col(0))
        if self._solver is None:
            self._solver = ModSolver(self.incl.matrix, self.ambient.relations)
        x = self._solver.solve(IntMatrix.column(vals))
        if x is None:
            raise IllDefined("family is not natural for this hom group")
        return Element(self.group, x)

    @property
    def basis(self) -> List[PresheafHom]:
        if self._basis is None:
            self._basis = [
                self.hom_of(IntMatrix.column(
                    [1 if r == j else 0 for r in range(self.group.gens)]))
                for j in range(self.group.gens)]
        return self._basis


def presheaf_hom_group(F: AbPresheaf, G: AbPresheaf) -> PresheafHomGroup:
    return PresheafHomGroup(F, G)


def _ihom_data(F: AbPresheaf, G: AbPresheaf):
    """Stalks of the internal hom with their hom-group presentations.

    The stalk at c is the hom group over the down-set below c; the
    restriction to d forgets the part of a family that lives outside
    the smaller down-set.
    """
    site = F.site
    downs = [site.down_poset(c) for c in site.elements()]
    phgs = []
    for c in site.elements():
        _, elems = downs[c]
        phgs.append(PresheafHomGroup(F.restrict(elems), G.restrict(elems)))
    stalks = [phg.group for phg in phgs]
    res = {}
    for (d, c) in site.strict_pairs():
        _, elems_c = downs[c]
        _, elems_d = downs[d]
        keep = [elems_c.index(e) for e in elems_d]
        cols = []
        for j in range(stalks[c].gens):
            fam = phgs[c].hom_of(IntMatrix.column(
                [1 if r == j else 0 for r in range(stalks[c].gens)]))
            part = PresheafHom(phgs[d].src_presheaf, phgs[d].tgt_presheaf,
                               [fam.components[k] for k in keep], check=False)
            cols.append(phgs[d].coords_of(part).coords.col(0))
        res[(d, c)] = FpAbHom(stalks[c], stalks[d],
                              IntMatrix.from_cols(cols, rows=stalks[d].gens),
                              check=True)
    presheaf = AbPresheaf(site, stalks, res, check=True)
    return presheaf, phgs, downs


def internal_hom(F: AbPresheaf, G: AbPresheaf) -> AbPresheaf:
    """Down-set hom presheaf: at c, the natural families below c."""
    return _ihom_data(F, G)[0]


def global_sections(F: AbPresheaf) -> FpAbGroup:
    """The limit of F: families compatible under every restriction."""
    site = F.site
    if site.size == 0:
        return fpab.make_group(0)
    ambient, offsets = fpab.direct_sum_many(list(F.stalks))
    pairs = site.strict_pairs()
    if not pairs:
        return ambient
    strips = []
    tgt_groups = []
    for (d, c) in pairs:
        tgt_groups.append(F.stalk(d))
        blocks = [IntMatrix.zero(F.stalk(d).gens, F.stalk(e).gens)
                  for e in site.elements()]
        blocks[c] = blocks[c] + F.res(d, c).matrix
        blocks[d] = blocks[d] - IntMatrix.identity(F.stalk(d).gens)
        strips.append(hstack(*blocks))
    total, _ = fpab.direct_sum_many(tgt_groups)
    constraint = FpAbHom(ambient, total, vstack(*strips), check=False)
    group, _ = fpab.kernel(constraint)
    return group


# -------------------------------------------------------------- context

class EvalHomGroup:
    """Hom(sum of ZY(c_i), A) as the direct sum of the stalks A(c_i)."""

    __slots__ = ("site", "free", "labels", "module", "offsets", "group")

    def __init__(self, free: FreePresheaf, module: AbPresheaf):
        self.site = free.site
        self.free = free
        self.labels = free.labels
        self.module = module
        groups = [module.stalk(l) for l in self.labels]
        self.group, self.offsets = fpab.direct_sum_many(groups)

    def hom_of(self, coords) -> PresheafHom:
        if isinstance(coords, Element):
            coords = coords.coords
        a = self.module
        units = []
        for i, l in enumerate(self.labels):
            off = self.offsets[i]
            units.append(IntMatrix.column(
                [coords.entry(off + r, 0) for r in range(a.stalk(l).gens)]))
        src = self.free.realize()
        comps = []
        for d in self.site.elements():
            cols = [(a.res(d, self.labels[i]).matrix * units[i]).col(0)
                    for i in self.free.support(d)]
            comps.append(FpAbHom(src.stalk(d), a.stalk(d),
                                 IntMatrix.from_cols(cols,
                                                     rows=a.stalk(d).gens),
                                 check=False))
        return PresheafHom(src, a, comps, check=False)


class PresheafContext(ModuleContext):
    """Presheaves of abelian groups over one fixed finite poset.

    Free objects are label lists of representables; epis and kernels are
    stalkwise; lifts out of frees solve at the Yoneda units and extend
    along restrictions.
    """

    def __init__(self, site: FinitePoset):
        self.site = site

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self.site == other.site

    def __hash__(self) -> int:
        return hash((type(self), self.site))

    def _obj(self, x) -> AbPresheaf:
        return x.realize() if isinstance(x, FreePresheaf) else x

    def zero_object(self) -> AbPresheaf:
        return FreePresheaf(self.site, ()).realize()

    def is_zero_object(self, obj) -> bool:
        if isinstance(obj, FreePresheaf):
            return not obj.labels
        return obj.is_zero()

    def free_rank(self, f) -> int:
        if isinstance(f, FreePresheaf):
            return len(f.labels)
        if isinstance(f, AbPresheaf) and f.free_labels is not None:
            return len(f.free_labels)
        raise NotFree("object is not a sum of representables")

    def epi_cover(self, b) -> Tuple[FreePresheaf, PresheafHom]:
        b = self._obj(b)
        labels = []
        gen_of = []
        for c in self.site.elements():
            for j in range(b.stalk(c).gens):
                labels.append(c)
                gen_of.append(j)
        free = FreePresheaf(self.site, tuple(labels))
        realized = free.realize()
        comps = []
        for d in self.site.elements():
            cols = [b.res(d, labels[i]).matrix.col(gen_of[i])
                    for i in free.support(d)]
            comps.append(FpAbHom(realized.stalk(d), b.stalk(d),
                                 IntMatrix.from_cols(cols,
                                                     rows=b.stalk(d).gens),
                                 check=False))
        return free, PresheafHom(realized, b, comps, check=False)

    def kernel(self, f: PresheafHom) -> Tuple[AbPresheaf, PresheafHom]:
        site = self.site
        parts = [fpab.kernel(f.components[c]) for c in site.elements()]
        stalks = [k for (k, _) in parts]
        res = {}
        for (d, c) in site.strict_pairs():
            moved = fpab.compose(f.src.res(d, c), parts[c][1])
            res[(d, c)] = fpab.corestrict(moved, parts[d][1])
        k = AbPresheaf(site, stalks, res, check=True)
        incl = PresheafHom(k, f.src, [incl for (_, incl) in parts],
                           check=False)
        return k, incl

    def compose(self, f, g) -> PresheafHom:
        return _compose(f, g)

    def identity(self, obj) -> PresheafHom:
        obj = self._obj(obj)
        return PresheafHom(obj, obj,
                           [identity_hom(obj.stalk(c))
                            for c in self.site.elements()], check=False)

    def zero_hom(self, src, tgt) -> PresheafHom:
        s, t = self._obj(src), self._obj(tgt)
        return PresheafHom(s, t,
                           [fpab.zero_hom(s.stalk(c), t.stalk(c))
                            for c in self.site.elements()], check=False)

    def is_zero_hom(self, f: PresheafHom) -> bool:
        return all(comp.is_zero() for comp in f.components)

    def is_epi(self, f: PresheafHom) -> bool:
        return is_epi(f)

    def corestrict(self, f: PresheafHom, incl: PresheafHom) -> PresheafHom:
        comps = [fpab.corestrict(f.components[c], incl.components[c])
                 for c in self.site.elements()]
        return PresheafHom(f.src, incl.src, comps, check=False)

    def lift_through(self, p: PresheafHom, g: PresheafHom) -> PresheafHom:
        """Solve at the Yoneda units of g's free source, extend downward."""
        labels = g.src.free_labels
        if labels is None:
            raise NotFree("lifts need a source that is a sum of "
                          "representables")
        free = FreePresheaf(self.site, labels)
        units = []
        for i, l in enumerate(labels):
            pos = free.support(l).index(i)
            solver = ModSolver(p.components[l].matrix,
                               p.tgt.stalk(l).relations)
            x = solver.solve(g.components[l].matrix.column_matrix(pos))
            if x is None:
                raise NotEpi("map does not reach a unit image")
            units.append(x)
        comps = []
        for d in self.site.elements():
            cols = [(p.src.res(d, labels[i]).matrix * units[i]).col(0)
                    for i in free.support(d)]
            comps.append(FpAbHom(g.src.stalk(d), p.src.stalk(d),
                                 IntMatrix.from_cols(
                                     cols, rows=p.src.stalk(d).gens),
                                 check=False))
        return PresheafHom(g.src, p.src, comps, check=False)

    def hom_group(self, f, a) -> EvalHomGroup:
        if isinstance(f, AbPresheaf):
            if f.free_labels is None:
                raise NotFree("hom_group source must be a sum of "
                              "representables")
            f = FreePresheaf(self.site, f.free_labels)
        return EvalHomGroup(f, self._obj(a))

    def induced_precompose(self, hg_src: EvalHomGroup, hg_tgt: EvalHomGroup,
                           d: PresheafHom) -> FpAbHom:
        a = hg_src.module
        site = self.site
        ls, lt = hg_src.labels, hg_tgt.labels
        height, width = hg_tgt.group.gens, hg_src.group.gens
        rows = [[0] * width for _ in range(height)]
        for t, ct in enumerate(lt):
            sup_t = [k for k, l in enumerate(lt) if site.is_leq(ct, l)]
            col = d.components[ct].matrix.col(sup_t.index(t))
            sup_s = [i for i, l in enumerate(ls) if site.is_leq(ct, l)]
            roff = hg_tgt.offsets[t]
            for k, i in enumerate(sup_s):
                alpha = col[k]
                if not alpha:
                    continue
                rmat = a.res(ct, ls[i]).matrix
                coff = hg_src.offsets[i]
                for u in range(rmat.rows):
                    row = rows[roff + u]
                    mrow = rmat.row(u)
                    for v in range(rmat.cols):
                        if mrow[v]:
                            row[coff + v] += alpha * mrow[v]
        m = IntMatrix.from_rows(rows, cols=width)
        return FpAbHom(hg_src.group, hg_tgt.group, m, check=False)

    def induced_postcompose(self, hg_src: EvalHomGroup, hg_tgt: EvalHomGroup,
                            f: PresheafHom) -> FpAbHom:
        if hg_src.labels:
            m = block_diag(*[f.components[l].matrix for l in hg_src.labels])
        else:
            m = IntMatrix.zero(0, 0)
        return FpAbHom(hg_src.group, hg_tgt.group, m, check=False)


def presheaf_context(site: FinitePoset) -> PresheafContext:
    return PresheafContext(site)


def external_ext(b: AbPresheaf, a: AbPresheaf, n: int) -> FpAbGroup:
    """Ext of presheaves via a full-site resolution by representables."""
    if b.site != a.site:
        raise SiteMismatch("Ext needs presheaves on one site")
    return resolution.ext_n(presheaf_context(b.site), b, a, n)


# ------------------------------------------------------------ sheaf Ext

class SheafExtResult:
    """The sheaf Ext presheaf plus the down-set resolution behind each stalk."""

    __slots__ = ("presheaf", "resolutions")

    def __init__(self, presheaf: AbPresheaf,
                 resolutions: Dict[int, FreeResolution]):
        self.presheaf = presheaf
        self.resolutions = resolutions

    def stalk(self, c: int) -> FpAbGroup:
        return self.presheaf.stalk(c)

    def __repr__(self) -> str:
        return f"SheafExtResult({self.presheaf!r})"


def principal_intersection_check(site: FinitePoset) -> bool:
    """Do principal down-sets intersect in empty or principal down-sets?"""
    for c in site.elements():
        for d in site.elements():
            inter = [x for x in site.elements()
                     if site.is_leq(x, c) and site.is_leq(x, d)]
            if not inter:
                continue
            if not any(all(site.is_leq(y, x) for y in inter) for x in inter):
                return False
    return True


def _transport_matrix(a: AbPresheaf, site: FinitePoset,
                      elems_c: Sequence[int], labels_c: Sequence[int],
                      elems_d: Sequence[int], labels_d: Sequence[int],
                      lam: PresheafHom) -> IntMatrix:
    """Cochain transport along a comparison lift.

    Takes evaluation coordinates of Hom(P^c_n, A) to those of
    Hom(P^d_n, A): restrict the cochain to the smaller down-set and
    precompose with the lift lam : P^d_n -> P^c_n restricted.
    """
    col_offs, total_w = [], 0
    for i in labels_c:
        col_offs.append(total_w)
        total_w += a.stalk(elems_c[i]).gens
    row_offs, total_h = [], 0
    for t in labels_d:
        row_offs.append(total_h)
        total_h += a.stalk(elems_d[t]).gens
    rows = [[0] * total_w for _ in range(total_h)]
    for t, ld in enumerate(labels_d):
        e = elems_d[ld]
        sup_d = [k for k, l in enumerate(labels_d)
                 if site.is_leq(e, elems_d[l])]
        col = lam.components[ld].matrix.col(sup_d.index(t))
        sup_c = [i for i, l in enumerate(labels_c)
                 if site.is_leq(e, elems_c[l])]
        for k, i in enumerate(sup_c):
            alpha = col[k]
            if not alpha:
                continue
            rmat = a.res(e, elems_c[labels_c[i]]).matrix
            for u in range(rmat.rows):
                row = rows[row_offs[t] + u]
                mrow = rmat.row(u)
                for v in range(rmat.cols):
                    if mrow[v]:
                        row[col_offs[i] + v] += alpha * mrow[v]
    return IntMatrix.from_rows(rows, cols=total_w)


def _class_map(src_data, tgt_data, transport: IntMatrix) -> FpAbHom:
    """Map on cohomology induced by a cocycle-level transport matrix."""
    cols = []
    for j in range(src_data.group.gens):
        rep = src_data.lattice.column_matrix(j)
        cols.append(tgt_data.coords_of(transport * rep).coords.col(0))
    m = IntMatrix.from_cols(cols, rows=tgt_data.group.gens)
    return FpAbHom(src_data.group, tgt_data.group, m, check=True)


def _sheaf_ext_general(b: AbPresheaf, a: AbPresheaf,
                       n: int) -> SheafExtResult:
    site = b.site
    per = {}
    for c in site.elements():
        sub, elems = site.down_poset(c)
        ctx = presheaf_context(sub)
        bc = b.restrict(elems)
        ac = a.restrict(elems)
        res = resolution.free_resolution(ctx, bc, n + 1)
        data = resolution.cohomology_data(resolution.hom_complex(res, ac), n)
        per[c] = (sub, elems, ctx, bc, res, data)
    maps = {}
    for (d, c) in site.strict_pairs():
        sub_c, elems_c, _, bc, res_c, data_c = per[c]
        sub_d, elems_d, ctx_d, bd, res_d, data_d = per[d]
        keep = [elems_c.index(e) for e in elems_d]
        q_objs = [res_c.free(k).realize().restrict(keep)
                  for k in range(n + 2)]
        q_diffs = [_restrict_hom(res_c.diff(k), keep,
                                 src=q_objs[k], tgt=q_objs[k - 1])
                   for k in range(1, n + 2)]
        q_aug = _restrict_hom(res_c.augmentation, keep,
                              src=q_objs[0], tgt=bd)
        q = FreeResolution(ctx_d, bd, q_objs, q_diffs, q_aug,
                           dd_verified=True)
        chain_maps = resolution.lift_chain_map(res_d, q, ctx_d.identity(bd))
        transport = _transport_matrix(
            a, site, elems_c, res_c.free(n).labels,
            elems_d, res_d.free(n).labels, chain_maps[n])
        maps[(d, c)] = _class_map(data_c, data_d, transport)
    stalks = [per[c][5].group for c in site.elements()]
    presheaf = AbPresheaf(site, stalks, maps, check=True)
    return SheafExtResult(presheaf, {c: per[c][4] for c in site.elements()})


def _sheaf_ext_fast(b: AbPresheaf, a: AbPresheaf, n: int) -> SheafExtResult:
    """One full-site resolution pushed through the internal hom.

    Sound whenever restricted representables stay free, which is what
    principal_intersection_check certifies.
    """
    site = b.site
    ctx = presheaf_context(site)
    res = resolution.free_resolution(ctx, b, n + 1)
    levels = [_ihom_data(res.free(k).realize(), a) for k in range(n + 2)]
    deltas = []
    for k in range(n + 1):
        ih_k, phgs_k, downs = levels[k]
        ih_next, phgs_next, _ = levels[k + 1]
        diff = res.diff(k + 1)
        comps = []
        for c in site.elements():
            _, elems = downs[c]
            dres = _restrict_hom(diff, elems,
                                 src=phgs_next[c].src_presheaf,
                                 tgt=phgs_k[c].src_presheaf)
            cols = []
            for fam in phgs_k[c].basis:
                cols.append(phgs_next[c].coords_of(
                    _compose(fam, dres)).coords.col(0))
            comps.append(FpAbHom(
                ih_k.stalk(c), ih_next.stalk(c),
                IntMatrix.from_cols(cols, rows=ih_next.stalk(c).gens),
                check=False))
        deltas.append(PresheafHom(ih_k, ih_next, comps, check=True))
    data = {}
    for c in site.elements():
        cx = resolution.FpAbComplex(
            [levels[k][0].stalk(c) for k in range(n + 2)],
            [deltas[k].components[c] for k in range(n + 1)])
        data[c] = resolution.cohomology_data(cx, n)
    maps = {}
    for (d, c) in site.strict_pairs():
        maps[(d, c)] = _class_map(data[c], data[d],
                                  levels[n][0].res(d, c).matrix)
    stalks = [data[c].group for c in site.elements()]
    presheaf = AbPresheaf(site, stalks, maps, check=True)
    resolutions = {}
    for c in site.elements():
        _, elems = site.down_poset(c)
        ctx_c = presheaf_context(site.induced(elems))
        objs = [res.free(k).realize().restrict(elems) for k in range(n + 2)]
        diffs = [_restrict_hom(res.diff(k), elems,
                               src=objs[k], tgt=objs[k - 1])
                 for k in range(1, n + 2)]
        aug = _restrict_hom(res.augmentation, elems,
                            src=objs[0], tgt=b.restrict(elems))
        resolutions[c] = FreeResolution(ctx_c, b.restrict(elems), objs,
                                        diffs, aug, dd_verified=True)
    return SheafExtResult(presheaf, resolutions)


def sheaf_ext(b: AbPresheaf, a: AbPresheaf, n: int,
              method: str = "general") -> SheafExtResult:
    """The Ext presheaf: at c, Ext over the down-set below c.

    method "general" resolves every down-set separately and connects the
    stalks by comparison lifts; "fast" uses one full-site resolution and
    the internal hom, valid on sites passing
    principal_intersection_check; "auto" picks.
    """
    if b.site != a.site:
        raise SiteMismatch("sheaf Ext needs presheaves on one site")
    if n < 0:
        raise ValueError("Ext degree must be nonnegative")
    if method == "auto":
        method = "fast" if principal_intersection_check(b.site) else "general"
    if method == "fast":
        if not principal_intersection_check(b.site):
            raise ValueError("fast path needs principal down-set "
                             "intersections")
        return _sheaf_ext_fast(b, a, n)
    if method != "general":
        raise ValueError(f"unknown method {method!r}")
    return _sheaf_ext_general(b, a, n)


# ------------------------------------------------- projectivity witness

def internal_projectivity_witness(site: FinitePoset, c: int,
                                  sigma: PresheafHom) -> Optional[int]:
    """First stalk where internal_hom(ZY(c), -) fails to preserve sigma.

    Returns None when the induced map is epi at every element.  Absence
    over any family of epis is evidence, never a certificate.
    """
    if not is_epi(sigma):
        raise ValueError("sigma must be an epimorphism")
    yc = free_presheaf(site, c)
    _, phgs_f, downs = _ihom_data(yc, sigma.src)
    _, phgs_g, _ = _ihom_data(yc, sigma.tgt)
    for e in site.elements():
        _, elems = downs[e]
        sg = _restrict_hom(sigma, elems,
                           src=phgs_f[e].tgt_presheaf,
                           tgt=phgs_g[e].tgt_presheaf)
        cols = []
        for fam in phgs_f[e].basis:
            cols.append(phgs_g[e].coords_of(
                _compose(sg, fam)).coords.col(0))
        induced = FpAbHom(phgs_f[e].group, phgs_g[e].group,
                          IntMatrix.from_cols(cols,
                                              rows=phgs_g[e].group.gens),
                          check=False)
        if not fpab.is_epi(induced):
            return e
    return None


_STALK_KINDS = (fpab.make_group(0), zmod(2), free_abelian(1))


def _canonical_hom(src_kind: int, tgt_kind: int) -> IntMatrix:
    # the one canonical choice per shape: unit map where one exists
    if src_kind == 0 or tgt_kind == 0 or (src_kind, tgt_kind) == (1, 2):
        return IntMatrix.zero(_STALK_KINDS[tgt_kind].gens,
                              _STALK_KINDS[src_kind].gens)
    return IntMatrix.from_rows([[1]])


def _canonical_presheaves(site: FinitePoset):
    """All functorial stalk assignments over {0, Z/2, Z} with unit maps."""
    out = []
    for kinds in itertools.product(range(3), repeat=site.size):
        stalks = [_STALK_KINDS[k] for k in kinds]
        res = {}
        for (d, c) in site.strict_pairs():
            res[(d, c)] = FpAbHom(stalks[c], stalks[d],
                                  _canonical_hom(kinds[c], kinds[d]),
                                  check=False)
        try:
            out.append((kinds, AbPresheaf(site, stalks, res, check=True)))
        except IllDefined:
            continue
    return out


def _kind_epi(src_kind: int, tgt_kind: int) -> bool:
    return tgt_kind == 0 or (src_kind, tgt_kind) in ((1, 1), (2, 1), (2, 2))


def witness_search(site: FinitePoset,
                   c: int) -> Optional[Tuple[PresheafHom, int]]:
    """Search the bounded canonical family of epis for a non-preserved one.

    The family: presheaves with stalks 0, Z/2, or Z, all restriction maps
    and all epi components the canonical unit map for their shape.  The
    first epi whose internal hom image fails stalkwise surjectivity is
    returned with the failing stalk; None means the whole family is
    preserved.
    """
    cands = _canonical_presheaves(site)
    for kinds_f, f in cands:
        for kinds_g, g in cands:
            if not all(_kind_epi(kf, kg)
                       for kf, kg in zip(kinds_f, kinds_g)):
                continue
            comps = [FpAbHom(f.stalk(e), g.stalk(e),
                             _canonical_hom(kinds_f[e], kinds_g[e]),
                             check=False)
                     for e in site.elements()]
            try:
                sigma = PresheafHom(f, g, comps, check=True)
            except IllDefined:
                continue
            stalk = internal_projectivity_witness(site, c, sigma)
            if stalk is not None:
                return sigma, stalk
    return None
