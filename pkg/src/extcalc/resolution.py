"""Free resolutions, Hom complexes, and cohomology over a module context.

A module context packages what a concrete module category must provide for
resolution-based computations: free objects, epi covers, kernels, lifts,
and hom-groups out of frees as presented abelian groups.  The same engine
then serves plain abelian groups, modules over a finite group ring, and
abelian presheaves on a finite poset.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .exactint import (
    DimensionMismatch,
    IntMatrix,
    ModSolver,
    block_diag,
    constrained_kernel,
    hstack,
    kron,
)
from . import fpab
from .fpab import FpAbGroup, FpAbHom, free_abelian, make_group


class ModuleContext:
    """Capability contract for a module category with enough frees.

    Free objects are the resolution bricks; the one semantic requirement is
    that homs out of a free object can always be lifted through epis built
    inside the context, which is what epi_cover plus lift_through witness.
    Contexts compare equal when they describe the same category; the
    default is type identity, refined by parameterized subclasses.
    """

    def __eq__(self, other) -> bool:
        return type(self) is type(other)

    def __hash__(self) -> int:
        return hash(type(self))

    def zero_object(self):
        raise NotImplementedError

    def is_zero_object(self, obj) -> bool:
        raise NotImplementedError

    def free(self, rank: int):
        raise NotImplementedError

    def free_rank(self, f) -> int:
        raise NotImplementedError

    def epi_cover(self, b):
        """(F, p) with F free and p : F -> B epi, deterministically chosen."""
        raise NotImplementedError

    def kernel(self, f):
        raise NotImplementedError

    def compose(self, f, g):
        raise NotImplementedError

    def identity(self, obj):
        raise NotImplementedError

    def zero_hom(self, src, tgt):
        raise NotImplementedError

    def is_zero_hom(self, f) -> bool:
        raise NotImplementedError

    def is_epi(self, f) -> bool:
        raise NotImplementedError

    def corestrict(self, f, incl):
        raise NotImplementedError

    def lift_through(self, p, g):
        """h with p∘h = g; g must start at a free object, p must be epi."""
        raise NotImplementedError

    def hom_group(self, f, a):
        """Hom(F, A) for free F, as an object with a .group presentation."""
        raise NotImplementedError

    def induced_precompose(self, hg_src, hg_tgt, d) -> FpAbHom:
        """Hom(F, A) -> Hom(F', A) induced by d : F' -> F."""
        raise NotImplementedError

    def induced_postcompose(self, hg_src, hg_tgt, f) -> FpAbHom:
        """Hom(F, A) -> Hom(F, A') induced by f : A -> A'."""
        raise NotImplementedError


class FreeResolution:
    """... -> P_2 -> P_1 -> P_0 -> B, free objects over a context.

    diffs[k] is d_{k+1} : P_{k+1} -> P_k; the factored form of d_n through
    the kernel object B_n = ker(d_{n-1}) is computed on demand, since
    explicitly built resolutions (bar, periodic) supply only the
    differentials.
    """

    def __init__(self, ctx: ModuleContext, target, frees: Sequence,
                 diffs: Sequence, augmentation, dd_verified: bool = False):
        self.ctx = ctx
        self.target = target
        self.frees = list(frees)
        self.diffs = list(diffs)
        self.augmentation = augmentation
        self.dd_verified = dd_verified
        self._factored = {}

    @property
    def max_deg(self) -> int:
        return len(self.frees) - 1

    def free(self, n: int):
        return self.frees[n]

    def diff(self, n: int):
        """d_n : P_n -> P_{n-1}, defined for 1 <= n <= max_deg."""
        return self.diffs[n - 1]

    def verify_dd(self) -> None:
        if self.dd_verified:
            return
        for k in range(len(self.diffs) - 1):
            if not self.ctx.is_zero_hom(self.ctx.compose(self.diffs[k],
                                                         self.diffs[k + 1])):
                raise RuntimeError(f"d∘d is nonzero between degrees "
                                   f"{k + 2} and {k}")
        self.dd_verified = True

    def factored(self, n: int):
        """(B_n, i_n, p_n) with i_n∘p_n = d_n and B_n = ker(d_{n-1})."""
        if n not in self._factored:
            below = self.augmentation if n == 1 else self.diff(n - 1)
            b_n, i_n = self.ctx.kernel(below)
            p_n = self.ctx.corestrict(self.diff(n), i_n)
            self._factored[n] = (b_n, i_n, p_n)
        return self._factored[n]

    def validate(self, up_to: Optional[int] = None) -> None:
        """Check d∘d = 0 and exactness at every internal degree."""
        self.verify_dd()
        top = self.max_deg if up_to is None else up_to
        if not self.ctx.is_epi(self.augmentation):
            raise RuntimeError("augmentation is not epi")
        for n in range(1, top + 1):
            _, _, p_n = self.factored(n)
            if not self.ctx.is_epi(p_n):
                raise RuntimeError(f"resolution is not exact at degree {n - 1}")


def free_resolution(ctx: ModuleContext, b, max_deg: int) -> FreeResolution:
    """Iterated cover-the-kernel construction, exact by construction."""
    if max_deg < 0:
        raise ValueError("max_deg must be nonnegative")
    p0_free, aug = ctx.epi_cover(b)
    frees = [p0_free]
    diffs = []
    factored = {}
    prev_epi = aug
    for n in range(1, max_deg + 1):
        b_n, i_n = ctx.kernel(prev_epi)
        f_n, p_n = ctx.epi_cover(b_n)
        frees.append(f_n)
        diffs.append(ctx.compose(i_n, p_n))
        factored[n] = (b_n, i_n, p_n)
        prev_epi = p_n
    res = FreeResolution(ctx, b, frees, diffs, aug, dd_verified=True)
    res._factored = factored
    return res


class FpAbComplex:
    """Cochain complex of presented groups, maps raising degree by one."""

    def __init__(self, groups: Sequence[FpAbGroup], maps: Sequence[FpAbHom],
                 verified: bool = False):
        if len(maps) != max(len(groups) - 1, 0):
            raise DimensionMismatch("need exactly one map per adjacent pair")
        for n, m in enumerate(maps):
            if m.src != groups[n] or m.tgt != groups[n + 1]:
                raise DimensionMismatch(f"map {n} endpoints do not match")
        if not verified:
            for n in range(len(maps) - 1):
                if not fpab.compose(maps[n + 1], maps[n]).is_zero():
                    raise ValueError(f"composite of maps {n} and {n + 1} "
                                     "is nonzero")
        self.groups = list(groups)
        self.maps = list(maps)

    def top_degree(self) -> int:
        return len(self.groups) - 1


def zero_complex(length: int) -> FpAbComplex:
    zero = make_group(0, IntMatrix.zero(0, 0))
    return FpAbComplex([zero] * (length + 1),
                       [fpab.zero_hom(zero, zero)] * length, verified=True)


class CohomologyData:
    """H^n of a complex with enough data to map cocycles to coordinates.

    lattice columns are cocycle representatives in C^n generator
    coordinates; they generate {x : d(x) = 0 in C^{n+1}} and present H^n
    after quotienting by coboundaries and C^n relations.
    """

    def __init__(self, group: FpAbGroup, lattice: IntMatrix, boundary: IntMatrix):
        self.group = group
        self.lattice = lattice
        self._boundary = boundary
        self._solver = None

    def coords_of(self, cocycle: IntMatrix) -> fpab.Element:
        """Class of a cocycle given in C^n generator coordinates."""
        if self._solver is None:
            self._solver = ModSolver(self.lattice, self._boundary)
        x = self._solver.solve(cocycle)
        if x is None:
            raise ValueError("column is not a cocycle for this complex degree")
        return fpab.Element(self.group, x)

    def representative(self, coords: fpab.Element) -> IntMatrix:
        return self.lattice * coords.coords


def cohomology_data(c: FpAbComplex, n: int) -> CohomologyData:
    if n < 0 or n > c.top_degree():
        raise ValueError(f"degree {n} outside complex range 0..{c.top_degree()}")
    group_n = c.groups[n]
    if n < len(c.maps):
        out = c.maps[n]
        lattice = constrained_kernel(out.matrix, out.tgt.relations)
    else:
        lattice = IntMatrix.identity(group_n.gens)
    incoming = (c.maps[n - 1].matrix if n >= 1
                else IntMatrix.zero(group_n.gens, 0))
    boundary = hstack(group_n.relations, incoming)
    relations = constrained_kernel(lattice, boundary)
    return CohomologyData(make_group(lattice.cols, relations), lattice, boundary)


def cohomology(c: FpAbComplex, n: int) -> FpAbGroup:
    """ker(dⁿ)/im(dⁿ⁻¹); degree 0 takes the incoming map to be zero."""
    return cohomology_data(c, n).group


def hom_complex(p: FreeResolution, a) -> FpAbComplex:
    """Apply Hom(−, A) degreewise to a free resolution.

    The composite-zero property is checked once on the resolution itself
    (free-object level, where maps are small), not on the induced
    presented-group matrices, which can be large.
    """
    ctx = p.ctx
    p.verify_dd()
    hgs = [ctx.hom_group(p.free(n), a) for n in range(p.max_deg + 1)]
    maps = [ctx.induced_precompose(hgs[n], hgs[n + 1], p.diff(n + 1))
            for n in range(p.max_deg)]
    return FpAbComplex([hg.group for hg in hgs], maps, verified=True)


def ext_n(ctx: ModuleContext, b, a, n: int) -> FpAbGroup:
    """Ext^n(B, A) over the context, via a free resolution of B."""
    if n < 0:
        raise ValueError("Ext degree must be nonnegative")
    res = free_resolution(ctx, b, n + 1)
    return cohomology(hom_complex(res, a), n)


def lift_chain_map(p: FreeResolution, q: FreeResolution, f) -> List:
    """Chain map over f : target(P) -> target(Q), degree by degree.

    Standard comparison-theorem construction: lift the augmentation square
    first, then lift each composite through the factored differential of Q.
    Any failure means Q is not exact where it should be.
    """
    if p.ctx != q.ctx:
        raise ValueError("resolutions live in different contexts")
    ctx = p.ctx
    depth = min(p.max_deg, q.max_deg)
    t0 = ctx.lift_through(q.augmentation, ctx.compose(f, p.augmentation))
    chain = [t0]
    for n in range(1, depth + 1):
        psi = ctx.compose(chain[n - 1], p.diff(n))
        _, i_n, p_n = q.factored(n)
        try:
            restricted = ctx.corestrict(psi, i_n)
        except ValueError as exc:
            raise RuntimeError(f"comparison lift failed at degree {n}: "
                               f"{exc}") from exc
        chain.append(ctx.lift_through(p_n, restricted))
    return chain


class ZContext(ModuleContext):
    """Finitely presented abelian groups as the base module category."""

    def zero_object(self) -> FpAbGroup:
        return make_group(0, IntMatrix.zero(0, 0))

    def is_zero_object(self, obj: FpAbGroup) -> bool:
        return obj.is_trivial()

    def free(self, rank: int) -> FpAbGroup:
        return free_abelian(rank)

    def free_rank(self, f: FpAbGroup) -> int:
        return f.gens

    def epi_cover(self, b: FpAbGroup):
        cover = free_abelian(b.gens)
        return cover, FpAbHom(cover, b, IntMatrix.identity(b.gens), check=False)

    def kernel(self, f: FpAbHom):
        return fpab.kernel(f)

    def compose(self, f: FpAbHom, g: FpAbHom) -> FpAbHom:
        return fpab.compose(f, g)

    def identity(self, obj: FpAbGroup) -> FpAbHom:
        return fpab.identity_hom(obj)

    def zero_hom(self, src: FpAbGroup, tgt: FpAbGroup) -> FpAbHom:
        return fpab.zero_hom(src, tgt)

    def is_zero_hom(self, f: FpAbHom) -> bool:
        return f.is_zero()

    def is_epi(self, f: FpAbHom) -> bool:
        return fpab.is_epi(f)

    def corestrict(self, f: FpAbHom, incl: FpAbHom) -> FpAbHom:
        return fpab.corestrict(f, incl)

    def lift_through(self, p: FpAbHom, g: FpAbHom) -> FpAbHom:
        return fpab.lift_through_epi(p, g)

    def hom_group(self, f: FpAbGroup, a: FpAbGroup) -> "ZFreeHomGroup":
        if not f.is_free():
            raise ValueError("hom_group source must be free")
        return ZFreeHomGroup(f.gens, a)

    def induced_precompose(self, hg_src: "ZFreeHomGroup",
                           hg_tgt: "ZFreeHomGroup", d: FpAbHom) -> FpAbHom:
        # Hom(Z^r, A) = A^r stacked columnwise; precomposition with the
        # matrix of d acts by kron on the stacked coordinates
        m = kron(d.matrix.transpose(), IntMatrix.identity(hg_src.module.gens))
        return FpAbHom(hg_src.group, hg_tgt.group, m, check=False)

    def induced_postcompose(self, hg_src: "ZFreeHomGroup",
                            hg_tgt: "ZFreeHomGroup", f: FpAbHom) -> FpAbHom:
        m = kron(IntMatrix.identity(hg_src.rank), f.matrix)
        return FpAbHom(hg_src.group, hg_tgt.group, m, check=False)


class ZFreeHomGroup:
    """Hom(Z^r, A) presented as A^r; coordinates stack the r images."""

    def __init__(self, rank: int, module: FpAbGroup):
        self.rank = rank
        self.module = module
        rel = (block_diag(*([module.relations] * rank)) if rank
               else IntMatrix.zero(0, 0))
        self.group = make_group(rank * module.gens, rel)

    def hom_of(self, coords: IntMatrix) -> FpAbHom:
        """The actual map Z^rank -> A encoded by stacked coordinates."""
        a = self.module.gens
        cols = [tuple(coords.entry(j * a + i, 0) for i in range(a))
                for j in range(self.rank)]
        return FpAbHom(free_abelian(self.rank), self.module,
                       IntMatrix.from_cols(cols, rows=a), check=False)


def z_context() -> ZContext:
    return ZContext()
