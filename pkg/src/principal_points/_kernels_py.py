"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``."""
import numpy as np

from .errors import SingularMatrixError

PIVOT_FLOOR = 1e-30


def thomas_solve(diag, off, rhs):
    """Solve a symmetric tridiagonal system by forward elimination / back substitution."""
    diag = [float(v) for v in diag]
    off = [float(v) for v in off]
    rhs = [float(v) for v in rhs]
    n = len(diag)
    if len(off) != max(n - 1, 0) or len(rhs) != n:
        raise ValueError("inconsistent tridiagonal system sizes")
    if n == 0:
        return np.empty(0)
    x = [0.0] * n
    cp = [0.0] * n
    pivot = diag[0]
    if abs(pivot) < PIVOT_FLOOR:
        raise SingularMatrixError(f"pivot 0 has magnitude {abs(pivot):.3g}")
    x[0] = rhs[0] / pivot
    if n > 1:
        cp[0] = off[0] / pivot
    for i in range(1, n):
        pivot = diag[i] - off[i - 1] * cp[i - 1]
        if abs(pivot) < PIVOT_FLOOR:
            raise SingularMatrixError(f"pivot {i} has magnitude {abs(pivot):.3g}")
        if i < n - 1:
            cp[i] = off[i] / pivot
        x[i] = (rhs[i] - off[i - 1] * x[i - 1]) / pivot
    for i in range(n - 2, -1, -1):
        x[i] -= cp[i] * x[i + 1]
    return np.array(x)


def dp_partition(w, x, n):
    """Optimal split of weighted sorted atoms into ``n`` contiguous groups.

    Same contract as the compiled kernel; the inner minimisation is
    vectorised over the split position.
    """
    w = np.ascontiguousarray(w, dtype=float)
    x = np.ascontiguousarray(x, dtype=float)
    G = w.size
    if x.size != G:
        raise ValueError("weights and positions differ in length")
    if n < 1 or n > G:
        raise ValueError("need 1 <= n <= number of atoms")
    y = x - (w @ x) / w.sum()
    s0 = np.concatenate([[0.0], np.cumsum(w)])
    s1 = np.concatenate([[0.0], np.cumsum(w * y)])
    s2 = np.concatenate([[0.0], np.cumsum(w * y * y)])

    def cost(i, j):
        c0 = s0[j] - s0[i]
        c1 = s1[j] - s1[i]
        c2 = s2[j] - s2[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(c0 > 0, c2 - c1 * c1 / c0, 0.0)

    prev = cost(np.zeros(G + 1, dtype=np.intp), np.arange(G + 1))
    back = np.zeros((n + 1, G + 1), dtype=np.intp)
    for k in range(2, n + 1):
        curr = np.full(G + 1, np.inf)
        for j in range(k, G + 1):
            i = np.arange(k - 1, j)
            cand = prev[i] + cost(i, j)
            t = int(np.argmin(cand))
            curr[j] = cand[t]
            back[k, j] = i[t]
        prev = curr

    bounds = np.empty(n + 1, dtype=np.intp)
    bounds[n] = G
    for k in range(n, 1, -1):
        bounds[k - 1] = back[k, bounds[k]]
    bounds[0] = 0
    return bounds
