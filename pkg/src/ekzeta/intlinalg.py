"""Exact integer matrix normal forms: column-style HNF, SNF with
transforms, kernels and membership solves.  Matrices are lists of rows of
python ints; sizes here are tiny (<= 2N x 2N with N <= 4), so the textbook
algorithms are fine.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ValidationError


def mat_copy(M):
    return [row[:] for row in M]


def mat_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(A, B):
    n, m, k = len(A), len(B[0]), len(B)
    if len(A[0]) != k:
        raise ValidationError("matmul shape mismatch")
    return [[sum(A[i][t] * B[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def mat_vec(A, v):
    return [sum(A[i][t] * v[t] for t in range(len(v))) for i in range(len(A))]


def mat_transpose(A):
    return [list(col) for col in zip(*A)]


def det_int(M) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    n = len(M)
    A = mat_copy(M)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for i in range(k + 1, n):
                if A[i][k] != 0:
                    A[k], A[i] = A[i], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
            A[i][k] = 0
        prev = A[k][k]
    return sign * A[-1][-1]


def hnf_columns(M):
    """Column Hermite normal form.

    Returns H with the same column span over Z: lower-triangular-style,
    pivot of each column positive, entries to the right of a pivot reduced
    into [0, pivot).  Zero columns are dropped.  H is the canonical
    representative of the column lattice."""
    A = [row[:] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    r = 0  # current pivot row
    c = 0  # current pivot column
    while r < rows and c < cols:
        # gcd-reduce columns c..end on row r
        piv = None
        for j in range(c, cols):
            if A[r][j] != 0:
                piv = j
                break
        if piv is None:
            r += 1
            continue
        _swap_cols(A, c, piv)
        j = c + 1
        while j < cols:
            if A[r][j] != 0:
                _gcd_step_cols(A, r, c, j)
            j += 1
        if A[r][c] < 0:
            _scale_col(A, c, -1)
        # reduce earlier columns against this pivot
        for j in range(0, c):
            if A[r][c] != 0:
                q = A[r][j] // A[r][c]
                if q:
                    _addmul_col(A, j, c, -q)
        r += 1
        c += 1
    # drop zero columns
    out_cols = []
    for j in range(cols):
        if any(A[i][j] != 0 for i in range(rows)):
            out_cols.append([A[i][j] for i in range(rows)])
    if not out_cols:
        return [[0] for _ in range(rows)] if rows else []
    return mat_transpose(out_cols)


def _swap_cols(A, i, j):
    if i == j:
        return
    for row in A:
        row[i], row[j] = row[j], row[i]


def _scale_col(A, j, s):
    for row in A:
        row[j] *= s


def _addmul_col(A, j, k, q):
    for row in A:
        row[j] += q * row[k]


def _gcd_step_cols(A, r, c, j):
    """Zero A[r][j] against pivot column c using the extended gcd."""
    a, b = A[r][c], A[r][j]
    g, u, v = _xgcd(a, b)
    p, q = a // g, b // g
    for row in A:
        x, y = row[c], row[j]
        row[c] = u * x + v * y
        row[j] = -q * x + p * y


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def snf_with_transform(M):
    """Diagonalization by unimodular row/column operations: returns
    (U, D, V) with U*M*V = D, U, V unimodular, D diagonal with d_i >= 0.

    The divisibility chain of the true Smith form is not enforced; every
    consumer here (coset boxes, integral solves, kernels) only needs a
    diagonal form with recorded transforms."""
    A = mat_copy(M)
    n = len(A)
    m = len(A[0])
    U = mat_identity(n)
    V = mat_identity(m)

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        if i != j:
            _swap_cols(A, i, j)
            _swap_cols(V, i, j)

    def addmul_row(i, k, q):
        for t in range(m):
            A[i][t] += q * A[k][t]
        for t in range(n):
            U[i][t] += q * U[k][t]

    def addmul_col(j, k, q):
        _addmul_col(A, j, k, q)
        _addmul_col(V, j, k, q)

    t = 0
    while t < min(n, m):
        # find smallest nonzero entry in the remaining block
        piv = None
        for i in range(t, n):
            for j in range(t, m):
                if A[i][j] != 0 and (piv is None or abs(A[i][j]) < abs(A[piv[0]][piv[1]])):
                    piv = (i, j)
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            for i in range(t + 1, n):
                while A[i][t] != 0:
                    addmul_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t] != 0:
                        swap_rows(t, i)
            for j in range(t + 1, m):
                while A[t][j] != 0:
                    addmul_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j] != 0:
                        swap_cols(t, j)
            if all(A[i][t] == 0 for i in range(t + 1, n)) and all(
                A[t][j] == 0 for j in range(t + 1, m)
            ):
                break
        if A[t][t] < 0:
            _scale_col(A, t, -1)
            _scale_col(V, t, -1)
        t += 1
    return U, A, V


def mat_inverse_unimodular(U):
    """Inverse of a unimodular integer matrix, exact."""
    n = len(U)
    d = det_int(U)
    if d not in (1, -1):
        raise ValidationError("matrix is not unimodular")
    cols = []
    for j in range(n):
        e = [1 if i == j else 0 for i in range(n)]
        x = solve_rational(U, e)
        cols.append([int(v) for v in x])
    return mat_transpose(cols)


def solve_int(B, v) -> list[int] | None:
    """Solve B x = v for x in Z^m (B integer n x m, full column rank not
    required); returns None when no integral solution exists."""
    n = len(B)
    m = len(B[0])
    U, D, V = snf_with_transform(B)
    w = mat_vec(U, v)
    y = [0] * m
    r = min(n, m)
    for i in range(r):
        d = D[i][i]
        if d == 0:
            if w[i] != 0:
                return None
        else:
            if w[i] % d != 0:
                return None
            y[i] = w[i] // d
    for i in range(r, n):
        if w[i] != 0:
            return None
    return mat_vec(V, y)


def solve_rational(B, v) -> list[Fraction] | None:
    """Solve B x = v over Q (B integer or Fraction entries); returns one
    solution or None if inconsistent."""
    n = len(B)
    m = len(B[0])
    A = [[Fraction(B[i][j]) for j in range(m)] + [Fraction(v[i])] for i in range(n)]
    pivots = []
    row = 0
    for col in range(m):
        p = None
        for i in range(row, n):
            if A[i][col] != 0:
                p = i
                break
        if p is None:
            continue
        A[row], A[p] = A[p], A[row]
        pr = A[row][col]
        A[row] = [x / pr for x in A[row]]
        for i in range(n):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[row])]
        pivots.append(col)
        row += 1
        if row == n:
            break
    for i in range(row, n):
        if A[i][m] != 0:
            return None
    x = [Fraction(0)] * m
    for i, col in enumerate(pivots):
        x[col] = A[i][m]
    return x


def lll_reduce_gram(G, delta=Fraction(99, 100)) -> list[list[int]]:
    """LLL reduction of a positive-definite integral Gram matrix.

    Returns the unimodular transform U (rows = coefficient vectors of the
    reduced basis in the original basis); exact rational Gram-Schmidt with
    the classical incremental size-reduction and swap updates."""
    n = len(G)
    U = mat_identity(n)

    def gram(i, j):
        return sum(U[i][a] * G[a][b] * U[j][b] for a in range(n) for b in range(n))

    # initial GSO
    mu = [[Fraction(0)] * n for _ in range(n)]
    Bstar = [Fraction(0)] * n
    for i in range(n):
        Bstar[i] = Fraction(gram(i, i))
        for j in range(i):
            mu[i][j] = Fraction(gram(i, j))
            for t in range(j):
                mu[i][j] -= mu[i][t] * mu[j][t] * Bstar[t]
            mu[i][j] /= Bstar[j]
            Bstar[i] -= mu[i][j] ** 2 * Bstar[j]

    k = 1
    guard = 0
    while k < n:
        guard += 1
        if guard > 100000:
            raise ValidationError("LLL failed to terminate")
        for j in range(k - 1, -1, -1):
            q = round(mu[k][j])
            if q:
                U[k] = [x - q * y for x, y in zip(U[k], U[j])]
                for t in range(j):
                    mu[k][t] -= q * mu[j][t]
                mu[k][j] -= q
        if Bstar[k] >= (delta - mu[k][k - 1] ** 2) * Bstar[k - 1]:
            k += 1
            continue
        # swap rows k-1 and k with the standard GSO updates
        U[k], U[k - 1] = U[k - 1], U[k]
        mu_old = mu[k][k - 1]
        Bk = Bstar[k] + mu_old**2 * Bstar[k - 1]
        if Bk == 0:
            raise ValidationError("LLL hit a degenerate Gram matrix")
        mu[k][k - 1] = mu_old * Bstar[k - 1] / Bk
        Bstar[k] = Bstar[k - 1] * Bstar[k] / Bk
        Bstar[k - 1] = Bk
        for t in range(k - 1):
            mu[k - 1][t], mu[k][t] = mu[k][t], mu[k - 1][t]
        for i in range(k + 1, n):
            old = mu[i][k]
            mu[i][k] = mu[i][k - 1] - mu_old * old
            mu[i][k - 1] = old + mu[k][k - 1] * mu[i][k]
        k = max(k - 1, 1)
    return U


def kernel_int(B) -> list[list[int]]:
    """Basis of the integer kernel {x in Z^m : B x = 0} (column vectors)."""
    n = len(B)
    m = len(B[0])
    U, D, V = snf_with_transform(B)
    r = min(n, m)
    ker_cols = [j for j in range(m) if j >= r or D[j][j] == 0]
    return [[V[i][j] for i in range(m)] for j in ker_cols]
