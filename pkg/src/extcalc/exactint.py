"""Exact integer matrix arithmetic: Smith normal form, kernels, linear solving.

All entries are Python ints, so intermediate values never overflow.  Matrices
are immutable; every operation returns a fresh matrix.  Determinism matters
for downstream canonical forms, so pivot choices follow a fixed rule: the
minimal absolute value wins, with the smallest (row, col) index breaking ties.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence


class DimensionMismatch(ValueError):
    """Raised when matrix shapes do not line up.  Distinct from 'no solution'."""


class IntMatrix:
    """Immutable dense matrix over the integers.

    Stored row-major as a tuple of row tuples.  Either dimension may be
    zero; empty matrices participate in products and stacking with the
    usual conventions.
    """

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, entries: Iterable[Iterable[int]]):
        if rows < 0 or cols < 0:
            raise DimensionMismatch("negative dimension")
        data = tuple(tuple(int(x) for x in row) for row in entries)
        if len(data) != rows or any(len(r) != cols for r in data):
            raise DimensionMismatch(
                f"entry grid does not match declared shape {rows}x{cols}"
            )
        self.rows = rows
        self.cols = cols
        self.data = data

    @classmethod
    def _wrap(cls, rows: int, cols: int, data: tuple) -> "IntMatrix":
        # trusted construction: data must already be a tuple of int-tuples
        # of the declared shape; skips the per-entry normalization, which
        # matters for induced matrices with millions of entries
        m = object.__new__(cls)
        m.rows = rows
        m.cols = cols
        m.data = data
        return m

    @classmethod
    def from_rows(cls, entries: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        rows = len(entries)
        if rows == 0:
            if cols is None:
                cols = 0
            return cls(0, cols, ())
        return cls(rows, len(entries[0]), entries)

    @classmethod
    def from_cols(cls, columns: Sequence[Sequence[int]], rows: Optional[int] = None) -> "IntMatrix":
        if len(columns) == 0:
            return cls(rows if rows is not None else 0, 0, ((),) * (rows or 0))
        height = len(columns[0])
        if any(len(c) != height for c in columns):
            raise DimensionMismatch("ragged column list")
        return cls(height, len(columns), (tuple(c[i] for c in columns) for i in range(height)))

    @classmethod
    def zero(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, ((0,) * cols,) * rows)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, (tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def diagonal(cls, values: Sequence[int], rows: Optional[int] = None, cols: Optional[int] = None) -> "IntMatrix":
        k = len(values)
        r = rows if rows is not None else k
        c = cols if cols is not None else k
        return cls(r, c, (tuple(values[i] if (i == j and i < k) else 0 for j in range(c)) for i in range(r)))

    @classmethod
    def column(cls, values: Sequence[int]) -> "IntMatrix":
        return cls(len(values), 1, ((int(v),) for v in values))

    def entry(self, i: int, j: int) -> int:
        return self.data[i][j]

    def row(self, i: int) -> tuple:
        return self.data[i]

    def col(self, j: int) -> tuple:
        return tuple(r[j] for r in self.data)

    def columns(self) -> list:
        return [self.col(j) for j in range(self.cols)]

    def column_matrix(self, j: int) -> "IntMatrix":
        return IntMatrix(self.rows, 1, ((r[j],) for r in self.data))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, (self.col(j) for j in range(self.cols)))

    def take_cols(self, indices: Sequence[int]) -> "IntMatrix":
        return IntMatrix(self.rows, len(indices), (tuple(r[j] for j in indices) for r in self.data))

    def take_rows(self, indices: Sequence[int]) -> "IntMatrix":
        return IntMatrix(len(indices), self.cols, (self.data[i] for i in indices))

    def __mul__(self, other: "IntMatrix") -> "IntMatrix":
        if not isinstance(other, IntMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.rows}x{self.cols} times {other.rows}x{other.cols}")
        ocols = other.cols
        out = []
        for arow in self.data:
            acc = [0] * ocols
            for k, a in enumerate(arow):
                if a:
                    brow = other.data[k]
                    for j in range(ocols):
                        b = brow[j]
                        if b:
                            acc[j] += a * b
            out.append(tuple(acc))
        return IntMatrix(self.rows, ocols, out)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch("addition shape mismatch")
        return IntMatrix(self.rows, self.cols,
                         (tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatch("subtraction shape mismatch")
        return IntMatrix(self.rows, self.cols,
                         (tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.data, other.data)))

    def __neg__(self) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, (tuple(-a for a in r) for r in self.data))

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, (tuple(k * a for a in r) for r in self.data))

    def is_zero(self) -> bool:
        return all(a == 0 for r in self.data for a in r)

    def __eq__(self, other) -> bool:
        return (isinstance(other, IntMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __hash__(self) -> int:
        return hash((self.rows, self.cols, self.data))

    def __repr__(self) -> str:
        return f"IntMatrix({self.rows}, {self.cols}, {list(map(list, self.data))})"


def hstack(*mats: IntMatrix) -> IntMatrix:
    mats = tuple(m for m in mats)
    if not mats:
        raise DimensionMismatch("hstack of nothing")
    rows = mats[0].rows
    if any(m.rows != rows for m in mats):
        raise DimensionMismatch("hstack row mismatch")
    return IntMatrix(rows, sum(m.cols for m in mats),
                     (tuple(x for m in mats for x in m.data[i]) for i in range(rows)))


def vstack(*mats: IntMatrix) -> IntMatrix:
    mats = tuple(m for m in mats)
    if not mats:
        raise DimensionMismatch("vstack of nothing")
    cols = mats[0].cols
    if any(m.cols != cols for m in mats):
        raise DimensionMismatch("vstack column mismatch")
    return IntMatrix(sum(m.rows for m in mats), cols, (r for m in mats for r in m.data))


def block_diag(*mats: IntMatrix) -> IntMatrix:
    rows = sum(m.rows for m in mats)
    cols = sum(m.cols for m in mats)
    out = [[0] * cols for _ in range(rows)]
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            row = out[r0 + i]
            mrow = m.data[i]
            for j in range(m.cols):
                row[c0 + j] = mrow[j]
        r0 += m.rows
        c0 += m.cols
    return IntMatrix(rows, cols, out)


def kron(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    """Kronecker product, consistent with column-major vec: vec(AXB) = (B^T (x) A) vec(X)."""
    rows = a.rows * b.rows
    cols = a.cols * b.cols
    out = []
    for i in range(a.rows):
        for ib in range(b.rows):
            arow = a.data[i]
            brow = b.data[ib]
            out.append(tuple(arow[j] * brow[jb] for j in range(a.cols) for jb in range(b.cols)))
    return IntMatrix(rows, cols, out)


def det(a: IntMatrix) -> int:
    """Determinant by fraction-free (Bareiss) elimination."""
    if a.rows != a.cols:
        raise DimensionMismatch("determinant of a non-square matrix")
    n = a.rows
    if n == 0:
        return 1
    m = [list(r) for r in a.data]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pk = m[k][k]
        for i in range(k + 1, n):
            mik = m[i][k]
            rowi = m[i]
            rowk = m[k]
            for j in range(k + 1, n):
                rowi[j] = (pk * rowi[j] - mik * rowk[j]) // prev
            rowi[k] = 0
        prev = pk
    return sign * m[n - 1][n - 1]


class SmithDecomposition:
    """Result of snf: unimodular U, V and diagonal D with U*A*V = D.

    D is nonnegative with each diagonal entry dividing the next; trailing
    ones and zeros are kept so D always has the source's shape.  u_inv and
    v_inv are the exact integer inverses, tracked during the reduction.
    """

    __slots__ = ("U", "D", "V", "u_inv", "v_inv", "src_rows", "src_cols")

    def __init__(self, U, D, V, u_inv, v_inv):
        self.U = U
        self.D = D
        self.V = V
        self.u_inv = u_inv
        self.v_inv = v_inv
        self.src_rows = D.rows
        self.src_cols = D.cols

    def diagonal(self) -> list:
        return [self.D.data[i][i] for i in range(min(self.D.rows, self.D.cols))]

    def nonzero_diagonal(self) -> list:
        return [d for d in self.diagonal() if d != 0]


def snf(a: IntMatrix) -> SmithDecomposition:
    """Smith normal form by classical row and column reduction.

    Pivot rule: minimal absolute value among remaining nonzero entries,
    ties broken by smallest (row, col).  The divisibility chain is enforced
    by folding offending rows into the pivot row and re-reducing.
    """
    m, n = a.rows, a.cols
    d = [list(r) for r in a.data]
    u = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    ui = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    v = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    vi = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_op(i, t, c):
        # row_i += c * row_t
        di, dt = d[i], d[t]
        for j in range(n):
            x = dt[j]
            if x:
                di[j] += c * x
        uirow, utrow = u[i], u[t]
        for j in range(m):
            x = utrow[j]
            if x:
                uirow[j] += c * x
        for r in ui:
            x = r[i]
            if x:
                r[t] -= c * x

    def col_op(j, t, c):
        # col_j += c * col_t
        for r in d:
            x = r[t]
            if x:
                r[j] += c * x
        for r in v:
            x = r[t]
            if x:
                r[j] += c * x
        vij, vit = vi[j], vi[t]
        for k in range(n):
            x = vij[k]
            if x:
                vit[k] -= c * x

    def swap_rows(i, t):
        d[i], d[t] = d[t], d[i]
        u[i], u[t] = u[t], u[i]
        for r in ui:
            r[i], r[t] = r[t], r[i]

    def swap_cols(j, t):
        for r in d:
            r[j], r[t] = r[t], r[j]
        for r in v:
            r[j], r[t] = r[t], r[j]
        vi[j], vi[t] = vi[t], vi[j]

    def negate_row(t):
        d[t] = [-x for x in d[t]]
        u[t] = [-x for x in u[t]]
        for r in ui:
            r[t] = -r[t]

    lim = min(m, n)
    t = 0
    while t < lim:
        best = None
        for i in range(t, m):
            row = d[i]
            for j in range(t, n):
                x = row[j]
                if x:
                    ax = -x if x < 0 else x
                    if best is None or ax < best[0]:
                        best = (ax, i, j)
        if best is None:
            break
        _, pi, pj = best
        if pi != t:
            swap_rows(pi, t)
        if pj != t:
            swap_cols(pj, t)
        while True:
            if d[t][t] < 0:
                negate_row(t)
            piv = d[t][t]
            dirty = False
            for i in range(t + 1, m):
                x = d[i][t]
                if x:
                    q = x // piv
                    if q:
                        row_op(i, t, -q)
                    if d[i][t]:
                        dirty = True
            if dirty:
                bi, bv = t, abs(d[t][t])
                for i in range(t + 1, m):
                    x = d[i][t]
                    if x and abs(x) < bv:
                        bi, bv = i, abs(x)
                if bi != t:
                    swap_rows(bi, t)
                continue
            dirty = False
            for j in range(t + 1, n):
                x = d[t][j]
                if x:
                    q = x // piv
                    if q:
                        col_op(j, t, -q)
                    if d[t][j]:
                        dirty = True
            if dirty:
                bj, bv = t, abs(d[t][t])
                for j in range(t + 1, n):
                    x = d[t][j]
                    if x and abs(x) < bv:
                        bj, bv = j, abs(x)
                if bj != t:
                    swap_cols(bj, t)
                continue
            viol = None
            for i in range(t + 1, m):
                row = d[i]
                for j in range(t + 1, n):
                    if row[j] % piv:
                        viol = i
                        break
                if viol is not None:
                    break
            if viol is None:
                break
            row_op(t, viol, 1)
        t += 1

    return SmithDecomposition(
        IntMatrix(m, m, u), IntMatrix(m, n, d), IntMatrix(n, n, v),
        IntMatrix(m, m, ui), IntMatrix(n, n, vi),
    )


class _ReducedCol:
    """One column of a column-echelon reduction, stored sparsely by row."""

    __slots__ = ("d", "w", "pos", "pivot")


def _column_reduce(a: IntMatrix, track_rows: int):
    """Column-echelon reduction using column operations only.

    Returns (order, npivots): the columns after reduction, in position
    order.  Each carries its data entries (.d, keyed by row) and the
    transform restricted to the first track_rows coordinates (.w, keyed by
    original column index).  The first npivots columns form the echelon
    basis; the rest are identically zero, and their transforms record how
    they arose from the original first track_rows columns.  Column
    operations never change the kernel or the column span, which is the
    point.

    Columns live in dicts and a row index points each elimination step at
    the columns with support there, so cost follows the nonzero count
    rather than the shape; resolution differentials at scale are far too
    sparse for dense sweeps.
    """
    m, n = a.rows, a.cols
    order = []
    for j in range(n):
        col = _ReducedCol()
        col.d = {}
        col.w = {j: 1} if j < track_rows else {}
        col.pos = j
        col.pivot = False
        order.append(col)
    rowindex = {}
    for i, row in enumerate(a.data):
        for j, v in enumerate(row):
            if v:
                order[j].d[i] = v
                rowindex.setdefault(i, set()).add(order[j])
    front = 0
    for r in range(m):
        if front == n:
            break
        bucket = rowindex.pop(r, None)
        if not bucket:
            continue
        live = [col for col in bucket if not col.pivot and col.d.get(r)]
        while len(live) > 1:
            live.sort(key=lambda col: (abs(col.d[r]), col.pos))
            pcol = live[0]
            pv = pcol.d[r]
            pd = pcol.d
            pw = pcol.w
            for col in live[1:]:
                q = col.d[r] // pv
                if not q:
                    continue
                d = col.d
                for i, x in pd.items():
                    y = d.get(i, 0) - q * x
                    if y:
                        if i > r and i not in d:
                            rowindex.setdefault(i, set()).add(col)
                        d[i] = y
                    elif i in d:
                        del d[i]
                if pw:
                    w = col.w
                    for i, x in pw.items():
                        y = w.get(i, 0) - q * x
                        if y:
                            w[i] = y
                        elif i in w:
                            del w[i]
            live = [col for col in live if col.d.get(r)]
        if not live:
            continue
        pcol = live[0]
        if pcol.d[r] < 0:
            pcol.d = {i: -x for i, x in pcol.d.items()}
            pcol.w = {i: -x for i, x in pcol.w.items()}
        front_col = order[front]
        if front_col is not pcol:
            order[front], order[pcol.pos] = pcol, front_col
            front_col.pos, pcol.pos = pcol.pos, front
        pcol.pivot = True
        front += 1
    return order, front


def _densify(sparse: dict, length: int) -> list:
    dense = [0] * length
    for i, x in sparse.items():
        dense[i] = x
    return dense


def kernel_basis(a: IntMatrix) -> IntMatrix:
    """Basis for the lattice {x : A x = 0}, as columns.

    The result always has cols(A) - rank(A) columns and is saturated: the
    kernel of an integer matrix is a direct summand of the ambient lattice.
    """
    order, npiv = _column_reduce(a, track_rows=a.cols)
    return IntMatrix.from_cols([_densify(col.w, a.cols) for col in order[npiv:]],
                               rows=a.cols)


def constrained_kernel(a: IntMatrix, rel: IntMatrix) -> IntMatrix:
    """Generating columns for the lattice {x : A x lies in colspan(rel)}.

    Computed as the projection of ker[A | rel] onto the A-coordinates, so
    the result generates the lattice but need not be a basis.  Only the
    leading coordinates of the transform are tracked, which keeps the cost
    proportional to cols(A) rather than cols(A) + cols(rel).
    """
    if rel.rows != a.rows:
        raise DimensionMismatch("constraint matrix height mismatch")
    combined = hstack(a, rel) if rel.cols else a
    order, npiv = _column_reduce(combined, track_rows=a.cols)
    return IntMatrix.from_cols([_densify(col.w, a.cols) for col in order[npiv:]],
                               rows=a.cols)


def column_space_basis(a: IntMatrix) -> IntMatrix:
    """Basis for the column span of A, as the nonzero columns of a column echelon form."""
    order, npiv = _column_reduce(a, track_rows=0)
    return IntMatrix.from_cols([_densify(col.d, a.rows) for col in order[:npiv]],
                               rows=a.rows)


def rank(a: IntMatrix) -> int:
    _, npiv = _column_reduce(a, track_rows=0)
    return npiv


class SnfSolver:
    """Reusable solver for A x = b over the integers, one decomposition for many b."""

    def __init__(self, a: IntMatrix):
        self.a = a
        self.dec = snf(a)
        self.diag = self.dec.diagonal()

    def solve(self, b: IntMatrix) -> Optional[IntMatrix]:
        if b.rows != self.a.rows or b.cols != 1:
            raise DimensionMismatch(
                f"right-hand side is {b.rows}x{b.cols}, expected {self.a.rows}x1")
        c = self.dec.U * b
        n = self.a.cols
        y = [0] * n
        for i in range(self.a.rows):
            ci = c.data[i][0]
            di = self.diag[i] if i < len(self.diag) else 0
            if di:
                if ci % di:
                    return None
                y[i] = ci // di
            elif ci:
                return None
        return self.dec.V * IntMatrix.column(y)

    def solve_matrix(self, b: IntMatrix) -> Optional[IntMatrix]:
        """Solve for every column of b; None if any single column fails."""
        xs = []
        for j in range(b.cols):
            x = self.solve(b.column_matrix(j))
            if x is None:
                return None
            xs.append(x.col(0))
        return IntMatrix.from_cols(xs, rows=self.a.cols)


def solve(a: IntMatrix, b: IntMatrix) -> Optional[IntMatrix]:
    """One integer solution x of A x = b, or None when none exists.

    Shape errors raise DimensionMismatch; unsolvability returns None.
    """
    return SnfSolver(a).solve(b)


class ModSolver:
    """Solver for A x = b modulo the column span of Rel."""

    def __init__(self, a: IntMatrix, rel: IntMatrix):
        if rel.rows != a.rows:
            raise DimensionMismatch("relation matrix height mismatch")
        self.ncols = a.cols
        self.inner = SnfSolver(hstack(a, rel) if rel.cols else a)

    def solve(self, b: IntMatrix) -> Optional[IntMatrix]:
        x = self.inner.solve(b)
        if x is None:
            return None
        return x.take_rows(range(self.ncols))

    def solve_matrix(self, b: IntMatrix) -> Optional[IntMatrix]:
        xs = []
        for j in range(b.cols):
            x = self.solve(b.column_matrix(j))
            if x is None:
                return None
            xs.append(x.col(0))
        return IntMatrix.from_cols(xs, rows=self.ncols)


def solve_mod(a: IntMatrix, b: IntMatrix, rel: IntMatrix) -> Optional[IntMatrix]:
    """One x with A x - b in the column span of Rel, or None."""
    return ModSolver(a, rel).solve(b)
