"""Pure Python / numpy versions of the compiled kernels.

Same signatures and semantics as ``_dfd``; used when the extension is not
built or when ``FRECHETDS_PURE=1`` is set.
"""

import math

import numpy as np


def dfd(p, q):
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    # pairwise squared distances in one shot, DP in plain Python
    diff = p[:, None, :] - q[None, :, :]
    c = np.einsum("ijk,ijk->ij", diff, diff).tolist()
    m, n = len(c), len(c[0])
    row = [0.0] * n
    acc = 0.0
    for j, v in enumerate(c[0]):
        acc = v if v > acc else acc
        row[j] = acc
    for i in range(1, m):
        ci = c[i]
        diag = row[0]
        v = ci[0]
        row[0] = diag if diag > v else v
        for j in range(1, n):
            up = row[j]
            best = up if up < row[j - 1] else row[j - 1]
            if diag < best:
                best = diag
            v = ci[j]
            row[j] = v if v > best else best
            diag = up
    return math.sqrt(row[-1])


def dfd_pairs(A, B):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    N = max(A.shape[0], B.shape[0])
    p, q = A.shape[1], B.shape[1]
    A = np.broadcast_to(A, (N,) + A.shape[1:])
    B = np.broadcast_to(B, (N,) + B.shape[1:])
    row = np.empty((q, N))
    for i in range(p):
        diag = None
        for j in range(q):
            diff = A[:, i, :] - B[:, j, :]
            c = np.einsum("nk,nk->n", diff, diff)
            old = row[j].copy() if i > 0 else None
            if i == 0:
                v = c if j == 0 else np.maximum(c, row[j - 1])
            elif j == 0:
                v = np.maximum(c, old)
            else:
                v = np.maximum(c, np.minimum(np.minimum(old, row[j - 1]), diag))
            diag = old
            row[j] = v
    return np.sqrt(row[q - 1])
