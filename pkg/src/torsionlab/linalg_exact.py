"""Exact rational and integer linear algebra.

Matrices are lists of lists.  Rational routines work over ``fractions.Fraction``
and never touch floats; integer routines (Smith normal form and friends) work
over Python ints, so there is no overflow anywhere.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


class SingularMatrixError(ValueError):
    pass


def frac(x):
    """Coerce an entry to Fraction. Floats are rejected: exactness guard."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational entry: {x!r}")


def is_exact_entry(x):
    return isinstance(x, (int, Fraction, str)) and not isinstance(x, bool)


def fmat(rows):
    return [[frac(x) for x in row] for row in rows]


def identity(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(r, c):
    return [[Fraction(0)] * c for _ in range(r)]


def shape(a):
    return (len(a), len(a[0]) if a else 0)


def transpose(a):
    r, c = shape(a)
    return [[a[i][j] for i in range(r)] for j in range(c)]


def matmul(a, b):
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {shape(a)} @ {shape(b)}")
    bt = transpose(b)
    return [[sum(ra_i[k] * bt_j[k] for k in range(ca)) for bt_j in bt] for ra_i in a]


def madd(a, b):
    r, c = shape(a)
    return [[a[i][j] + b[i][j] for j in range(c)] for i in range(r)]


def msub(a, b):
    r, c = shape(a)
    return [[a[i][j] - b[i][j] for j in range(c)] for i in range(r)]


def mscale(s, a):
    s = frac(s)
    return [[s * x for x in row] for row in a]


def meq(a, b):
    return shape(a) == shape(b) and all(
        a[i][j] == b[i][j] for i in range(len(a)) for j in range(len(a[0]))
    )


def is_zero(a):
    return all(x == 0 for row in a for x in row)


def to_float(a):
    return np.array([[float(x) for x in row] for row in a], dtype=float)


def det(a):
    """Determinant by fraction-exact Gaussian elimination."""
    n, m = shape(a)
    if n != m:
        raise ValueError("det of non-square matrix")
    if n == 0:
        return Fraction(1)
    a = [row[:] for row in a]
    d = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            d = -d
        d *= a[col][col]
        inv = 1 / a[col][col]
        for r in range(col + 1, n):
            if a[r][col] == 0:
                continue
            f = a[r][col] * inv
            for c in range(col, n):
                a[r][c] -= f * a[col][c]
    return d


def inverse(a):
    n, m = shape(a)
    if n != m:
        raise ValueError("inverse of non-square matrix")
    aug = [row[:] + ident_row for row, ident_row in zip(a, identity(n))]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise SingularMatrixError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _echelon(a):
    """Row echelon form; returns (echelon rows, pivot column list)."""
    r, c = shape(a)
    a = [row[:] for row in a]
    pivots = []
    row = 0
    for col in range(c):
        piv = next((i for i in range(row, r) if a[i][col] != 0), None)
        if piv is None:
            continue
        a[row], a[piv] = a[piv], a[row]
        inv = 1 / a[row][col]
        a[row] = [x * inv for x in a[row]]
        for i in range(r):
            if i != row and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[row])]
        pivots.append(col)
        row += 1
        if row == r:
            break
    return a[:row], pivots


def rank(a):
    if not a or not a[0]:
        return 0
    return len(_echelon(a)[1])


def right_kernel(a):
    """Basis (list of column vectors) of {x : a x = 0}, over Fractions."""
    r, c = shape(a)
    if c == 0:
        return []
    if r == 0:
        return [[Fraction(int(i == j)) for i in range(c)] for j in range(c)]
    ech, pivots = _echelon(a)
    free = [j for j in range(c) if j not in pivots]
    basis = []
    for j in free:
        v = [Fraction(0)] * c
        v[j] = Fraction(1)
        for row_i, pc in enumerate(pivots):
            v[pc] = -ech[row_i][j]
        basis.append(v)
    return basis


def solve(a, b_cols):
    """Solve a X = B for each column of B; raises if inconsistent."""
    r, c = shape(a)
    aug = [a[i][:] + list(b_cols[i]) for i in range(r)]
    ech, pivots = _echelon(aug)
    ncols_b = len(b_cols[0]) if r else 0
    for row in ech:
        if all(row[j] == 0 for j in range(c)) and any(row[c:]):
            raise SingularMatrixError("inconsistent system")
    xs = [[Fraction(0)] * ncols_b for _ in range(c)]
    for row_i, pc in enumerate(pivots):
        if pc >= c:
            raise SingularMatrixError("inconsistent system")
        for j in range(ncols_b):
            xs[pc][j] = ech[row_i][c + j]
    # pivot columns only; valid when solution unique or any solution acceptable
    return xs


def cols_to_matrix(cols, nrows=None):
    if not cols:
        return [[] for _ in range(nrows or 0)]
    n = len(cols[0])
    return [[col[i] for col in cols] for i in range(n)]


def det_prime_psd(a):
    """Product of nonzero eigenvalues of a symmetric PSD rational matrix.

    Uses det'(A) = det(A + K K^T) / det(K^T K) with K a kernel basis; both
    determinants are exact.  Zero matrix (empty product) gives 1.
    """
    n, m = shape(a)
    if n != m:
        raise ValueError("det_prime of non-square matrix")
    if n == 0:
        return Fraction(1)
    kern = right_kernel(a)
    if not kern:
        return det(a)
    k = cols_to_matrix(kern, n)
    kt = transpose(k)
    num = det(madd(a, matmul(k, kt)))
    den = det(matmul(kt, k))
    return num / den


def vol_sq(m):
    """Squared product of nonzero singular values of a rational matrix.

    vol(M)^2 = det'(M^T M); exact via the kernel identity.
    """
    r, c = shape(m)
    if r == 0 or c == 0:
        return Fraction(1)
    return det_prime_psd(matmul(transpose(m), m))


def product_is_zero(a, b):
    """Exact test a @ b == 0 for Fraction matrices, via scaled integers.

    Clearing denominators turns the test into an integer matmul; numpy int64
    is used when a conservative magnitude bound permits, else exact Python
    ints.  Equivalent to is_zero(matmul(a, b)) but far faster on big inputs.
    """
    ra, ca = shape(a)
    rb, cb = shape(b)
    if ra == 0 or ca == 0 or rb == 0 or cb == 0:
        return True

    def scaled(m):
        den = 1
        for row in m:
            for x in row:
                den = den * x.denominator // math.gcd(den, x.denominator)
        ints = [[int(x * den) for x in row] for row in m]
        peak = max((abs(v) for row in ints for v in row), default=0)
        return ints, peak

    ia, pa = scaled(a)
    ib, pb = scaled(b)
    if pa and pb and pa * pb * ca < 2**62:
        prod = np.array(ia, dtype=np.int64) @ np.array(ib, dtype=np.int64)
        return not prod.any()
    bt = list(zip(*ib))
    for row in ia:
        for col in bt:
            if sum(x * y for x, y in zip(row, col)) != 0:
                return False
    return True


# ---------------------------------------------------------------------------
# integer matrices: Smith normal form and homology helpers


def smith_normal_form(a):
    """Smith normal form over the integers.

    Returns (U, D, V) with U a V = D, U and V unimodular, D diagonal with
    d_i | d_{i+1} and nonnegative.  Deterministic pivot choice (smallest
    absolute value, lowest index first).
    """
    a = [[int(x) for x in row] for row in a]
    r = len(a)
    c = len(a[0]) if r else 0
    u = [[int(i == j) for j in range(r)] for i in range(r)]
    v = [[int(i == j) for j in range(c)] for i in range(c)]

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, q):  # row_dst += q * row_src
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        u[dst] = [x + q * y for x, y in zip(u[dst], u[src])]

    def add_col(dst, src, q):
        for row in a:
            row[dst] += q * row[src]
        for row in v:
            row[dst] += q * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while True:
        # locate pivot: smallest nonzero |entry| in the remaining block
        best = None
        for i in range(t, r):
            for j in range(t, c):
                if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        # clear row and column t
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, r):
                if a[i][t] != 0:
                    q = a[i][t] // a[t][t]
                    add_row(i, t, -q)
                    if a[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, c):
                if a[t][j] != 0:
                    q = a[t][j] // a[t][t]
                    add_col(j, t, -q)
                    if a[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
        # divisibility: a[t][t] must divide the rest of the block
        piv = a[t][t]
        fixed = False
        for i in range(t + 1, r):
            for j in range(t + 1, c):
                if a[i][j] % piv != 0:
                    add_row(t, i, 1)
                    fixed = True
                    break
            if fixed:
                break
        if fixed:
            continue
        if piv < 0:
            negate_row(t)
        t += 1
    return u, a, v


def int_kernel_basis(a):
    """Basis of the saturated integer kernel lattice {x in Z^c : a x = 0}."""
    r = len(a)
    c = len(a[0]) if r else 0
    if c == 0:
        return []
    if r == 0 or all(x == 0 for row in a for x in row):
        return [[int(i == j) for i in range(c)] for j in range(c)]
    u, d, v = smith_normal_form(a)
    rk = sum(1 for i in range(min(r, c)) if d[i][i] != 0)
    return [[v[i][j] for i in range(c)] for j in range(rk, c)]


def int_solve_in_basis(basis_cols, z):
    """Integer coordinates of z in the given lattice basis (columns)."""
    if not basis_cols:
        if any(z):
            raise SingularMatrixError("vector outside lattice")
        return []
    a = [[Fraction(col[i]) for col in basis_cols] for i in range(len(z))]
    x = solve(a, [[Fraction(zi)] for zi in z])
    out = []
    for row in x:
        val = row[0]
        if val.denominator != 1:
            raise SingularMatrixError("vector outside integer lattice")
        out.append(int(val))
    # verify (solve() ignores non-pivot consistency for overdetermined input)
    recon = [sum(basis_cols[j][i] * out[j] for j in range(len(out))) for i in range(len(z))]
    if recon != list(z):
        raise SingularMatrixError("vector outside lattice")
    return out


def int_inverse(a):
    """Inverse of a unimodular integer matrix, as an integer matrix."""
    inv = inverse(fmat(a))
    out = []
    for row in inv:
        out_row = []
        for x in row:
            if x.denominator != 1:
                raise ValueError("matrix is not unimodular")
            out_row.append(int(x))
        out.append(out_row)
    return out


# ---------------------------------------------------------------------------
# float Gaussian elimination (eigensolver-free routes)


def rank_kernel_float(m, rtol=1e-10, scale=None):
    """Rank and kernel basis via column-pivoted elimination.

    Independent of LAPACK eigen/SVD drivers on purpose: this backs the
    determinant-route torsion oracle.  `scale` anchors the rank tolerance
    when the matrix may be a numerically-zero residue of a larger problem.
    """
    m = np.asarray(m, dtype=float)
    r, c = m.shape
    if c == 0:
        return 0, np.zeros((c, 0))
    if r == 0:
        return 0, np.eye(c)
    a = m.copy()
    own = np.max(np.abs(a)) if a.size else 0.0
    scale = max(own, scale or 0.0)
    if scale == 0.0:
        return 0, np.eye(c)
    tol = rtol * scale
    if own <= tol:
        return 0, np.eye(c)
    pivots = []
    row = 0
    for col in range(c):
        if row >= r:
            break
        i = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[i, col]) <= tol:
            continue
        a[[row, i]] = a[[i, row]]
        a[row] = a[row] / a[row, col]
        mask = np.arange(r) != row
        a[mask] -= np.outer(a[mask, col], a[row])
        pivots.append(col)
        row += 1
    free = [j for j in range(c) if j not in pivots]
    basis = np.zeros((c, len(free)))
    for idx, j in enumerate(free):
        basis[j, idx] = 1.0
        for rr, pc in enumerate(pivots):
            basis[pc, idx] = -a[rr, j]
    return len(pivots), basis


def vol_float(m, rtol=1e-10, scale=None):
    """Product of nonzero singular values via Gaussian elimination and LU dets."""
    m = np.asarray(m, dtype=float)
    r, c = m.shape
    if r == 0 or c == 0:
        return 1.0
    rk, kern = rank_kernel_float(m, rtol, scale)
    if rk == 0:
        return 1.0
    g = m.T @ m
    if kern.shape[1] == 0:
        val = np.linalg.det(g)
    else:
        val = np.linalg.det(g + kern @ kern.T) / np.linalg.det(kern.T @ kern)
    return float(np.sqrt(abs(val)))
