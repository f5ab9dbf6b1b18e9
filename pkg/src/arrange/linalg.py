"""Exact linear algebra over the rationals.

Ranks and homology dimensions are discrete invariants: a single rounded
pivot would corrupt every Betti number downstream, so everything here runs
on Fraction and nothing else.  Matrices are stored sparsely (no zero
entries); elimination falls back to dense rows below 64x64 where the
overhead of dictionaries is not worth it.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ArrangeError

_DENSE_LIMIT = 64


class ShapeMismatch(ArrangeError):
    pass


class CompositionNonzero(ArrangeError):
    pass


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


class RationalMatrix:
    """Sparse matrix over Q; only nonzero entries are stored."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows, cols, entries=None):
        if rows < 0 or cols < 0:
            raise ShapeMismatch(f"negative shape {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (i, j), v in entries.items():
                if not (0 <= i < rows and 0 <= j < cols):
                    raise ShapeMismatch(f"index ({i},{j}) outside {rows}x{cols}")
                v = _frac(v)
                if v:
                    self.entries[(i, j)] = v

    @classmethod
    def from_rows(cls, data):
        data = [list(row) for row in data]
        rows = len(data)
        cols = len(data[0]) if rows else 0
        entries = {}
        for i, row in enumerate(data):
            if len(row) != cols:
                raise ShapeMismatch("ragged rows")
            for j, v in enumerate(row):
                v = _frac(v)
                if v:
                    entries[(i, j)] = v
        return cls(rows, cols, entries)

    @classmethod
    def zeros(cls, rows, cols):
        return cls(rows, cols)

    @classmethod
    def identity(cls, n):
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    def get(self, i, j):
        return self.entries.get((i, j), Fraction(0))

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (isinstance(other, RationalMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and self.entries == other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, frozenset(self.entries.items())))

    def transpose(self):
        return RationalMatrix(
            self.cols, self.rows,
            {(j, i): v for (i, j), v in self.entries.items()})

    def __mul__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        if self.cols != other.rows:
            raise ShapeMismatch(
                f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        by_row = {}
        for (k, j), v in other.entries.items():
            by_row.setdefault(k, []).append((j, v))
        out = {}
        for (i, k), a in self.entries.items():
            for j, b in by_row.get(k, ()):
                key = (i, j)
                s = out.get(key, Fraction(0)) + a * b
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return RationalMatrix(self.rows, other.cols, out)

    def to_dense(self):
        dense = [[Fraction(0)] * self.cols for _ in range(self.rows)]
        for (i, j), v in self.entries.items():
            dense[i][j] = v
        return dense

    def rank(self):
        if not self.entries:
            return 0
        if self.rows < _DENSE_LIMIT and self.cols < _DENSE_LIMIT:
            return _dense_rank(self.to_dense())
        return _sparse_rank(self.entries, self.rows)

    def kernel_dim(self):
        return self.cols - self.rank()

    def kernel_basis(self):
        """Basis of the right kernel, as tuples of Fractions (one per column)."""
        reduced, pivots = rref(self.to_dense()) if self.rows else ((), ())
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = []
        for f in free:
            vec = [Fraction(0)] * self.cols
            vec[f] = Fraction(1)
            for r, pc in enumerate(pivots):
                vec[pc] = -reduced[r][f]
            basis.append(tuple(vec))
        return basis

    def __repr__(self):
        return f"RationalMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


def _dense_rank(mat):
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    rank = 0
    row = 0
    for col in range(ncols):
        sel = None
        for i in range(row, nrows):
            if mat[i][col]:
                sel = i
                break
        if sel is None:
            continue
        mat[row], mat[sel] = mat[sel], mat[row]
        pv = mat[row][col]
        for i in range(row + 1, nrows):
            f = mat[i][col]
            if f:
                f = f / pv
                mi, mr = mat[i], mat[row]
                for j in range(col, ncols):
                    mi[j] -= f * mr[j]
        rank += 1
        row += 1
        if row == nrows:
            break
    return rank


def _sparse_rank(entries, nrows):
    rows = {}
    for (i, j), v in entries.items():
        rows.setdefault(i, {})[j] = v
    rank = 0
    while rows:
        r = min(rows, key=lambda k: len(rows[k]))
        row = rows.pop(r)
        if not row:
            continue
        rank += 1
        c = min(row)
        pv = row[c]
        touched = [r2 for r2, row2 in rows.items() if c in row2]
        for r2 in touched:
            row2 = rows[r2]
            f = row2.pop(c) / pv
            for cc, vv in row.items():
                if cc == c:
                    continue
                nv = row2.get(cc, Fraction(0)) - f * vv
                if nv:
                    row2[cc] = nv
                else:
                    row2.pop(cc, None)
            if not row2:
                del rows[r2]
    return rank


def rank(m: RationalMatrix) -> int:
    return m.rank()


def kernel_dim(m: RationalMatrix) -> int:
    return m.kernel_dim()


def homology_dim(d_in: RationalMatrix, d_out: RationalMatrix) -> int:
    """Dimension of ker(d_out)/im(d_in) for maps  A --d_in--> B --d_out--> C.

    The middle space B is the codomain of d_in and the domain of d_out.
    """
    if d_out.cols != d_in.rows:
        raise ShapeMismatch(
            f"middle space disagrees: d_out domain {d_out.cols}, d_in codomain {d_in.rows}")
    if not (d_out * d_in).is_zero():
        raise CompositionNonzero("d_out * d_in != 0: not a complex")
    return d_out.cols - d_out.rank() - d_in.rank()


def rref(rows):
    """Reduced row echelon form with unit pivots.

    Returns (rows, pivot_columns) with zero rows dropped.  The output is the
    canonical representative of the row space, which is what the poset layer
    uses to deduplicate flats.
    """
    mat = [[_frac(x) for x in row] for row in rows]
    ncols = len(mat[0]) if mat else 0
    pivots = []
    r = 0
    for c in range(ncols):
        sel = None
        for i in range(r, len(mat)):
            if mat[i][c]:
                sel = i
                break
        if sel is None:
            continue
        mat[r], mat[sel] = mat[sel], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][c]:
                f = mat[i][c]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
        if r == len(mat):
            break
    return tuple(tuple(row) for row in mat[:r]), tuple(pivots)


def reduce_against(row, reduced_rows):
    """Reduce a single row against rows already in reduced echelon form."""
    out = [_frac(x) for x in row]
    for rrow in reduced_rows:
        pc = next((j for j, v in enumerate(rrow) if v), None)
        if pc is None:
            continue
        f = out[pc]
        if f:
            out = [a - f * b for a, b in zip(out, rrow)]
    return tuple(out)
