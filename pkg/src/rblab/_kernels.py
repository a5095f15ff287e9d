"""GF(2) kernels behind the symplectic Clifford representation.

Every kernel exists twice: a loop implementation compiled with
``numba.njit`` and a vectorized pure-numpy implementation. Both consume
their random bits in the same order, so for a given bit buffer they return
identical results. The numba path is used when numba imports and the
environment variable ``RBLAB_NUMBA`` is not set to ``0``.

Bit vectors are ``uint8`` arrays holding 0/1. A Pauli vector of length
``2n`` stores its X part in the first ``n`` entries and its Z part in the
last ``n``.
"""

import os

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("RBLAB_NUMBA", "1") != "0"

# attempts budgeted per column when sampling; exhaustion triggers a redraw
ATTEMPTS_PER_COLUMN = 4


def bit_budget(n):
    """Number of random bits consumed by one symplectic sample of size 2n."""
    nn = 2 * n
    return ATTEMPTS_PER_COLUMN * nn * nn


# ---------------------------------------------------------------------------
# loop implementations (numba-compiled when available)
# ---------------------------------------------------------------------------


def _loop_matmul(a, b):
    rows, inner = a.shape
    cols = b.shape[1]
    out = np.zeros((rows, cols), dtype=np.uint8)
    for i in range(rows):
        for k in range(inner):
            if a[i, k]:
                for j in range(cols):
                    out[i, j] ^= b[k, j]
    return out


def _loop_rank(a):
    m = a.copy()
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        piv = -1
        for r in range(rank, rows):
            if m[r, col]:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for c in range(cols):
                tmp = m[rank, c]
                m[rank, c] = m[piv, c]
                m[piv, c] = tmp
        for r in range(rows):
            if r != rank and m[r, col]:
                for c in range(cols):
                    m[r, c] ^= m[rank, c]
        rank += 1
        if rank == rows:
            break
    return rank


def _loop_solve_random(a, b, free_bits):
    rows, cols = a.shape
    aug = np.zeros((rows, cols + 1), dtype=np.uint8)
    for r in range(rows):
        for c in range(cols):
            aug[r, c] = a[r, c]
        aug[r, cols] = b[r]
    pivots = np.full(rows, -1, dtype=np.int64)
    is_pivot = np.zeros(cols, dtype=np.uint8)
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        piv = -1
        for r in range(rank, rows):
            if aug[r, col]:
                piv = r
                break
        if piv < 0:
            continue
        if piv != rank:
            for c in range(cols + 1):
                tmp = aug[rank, c]
                aug[rank, c] = aug[piv, c]
                aug[piv, c] = tmp
        for r in range(rows):
            if r != rank and aug[r, col]:
                for c in range(cols + 1):
                    aug[r, c] ^= aug[rank, c]
        pivots[rank] = col
        is_pivot[col] = 1
        rank += 1
    x = np.zeros(cols, dtype=np.uint8)
    for r in range(rank, rows):
        if aug[r, cols]:
            return x, False
    for c in range(cols):
        if not is_pivot[c]:
            x[c] = free_bits[c]
    for r in range(rank):
        acc = aug[r, cols]
        for c in range(cols):
            if not is_pivot[c] and aug[r, c]:
                acc ^= x[c]
        x[pivots[r]] = acc
    return x, True


def _loop_sample_symplectic(n, bits):
    nn = 2 * n
    cols = np.zeros((nn, nn), dtype=np.uint8)
    pos = 0
    for k in range(nn):
        a = np.zeros((k, nn), dtype=np.uint8)
        b = np.zeros(k, dtype=np.uint8)
        for j in range(k):
            # <v, c_j> = v . (Omega c_j); Omega swaps the X and Z halves
            for i in range(n):
                a[j, i] = cols[n + i, j]
                a[j, n + i] = cols[i, j]
            if k >= n and j == k - n:
                b[j] = 1
        while True:
            if pos + nn > bits.shape[0]:
                return cols, False
            x, ok = _loop_solve_random(a, b, bits[pos:pos + nn])
            pos += nn
            if not ok:
                return cols, False
            if k >= n:
                break
            # X images must be independent of the previous X images
            stack = np.zeros((k + 1, nn), dtype=np.uint8)
            for j in range(k):
                for i in range(nn):
                    stack[j, i] = cols[i, j]
            for i in range(nn):
                stack[k, i] = x[i]
            if _loop_rank(stack) == k + 1:
                break
        for i in range(nn):
            cols[i, k] = x[i]
    return cols, True


def _loop_sample_symplectic_batch(n, bits):
    count = bits.shape[0]
    nn = 2 * n
    out = np.zeros((count, nn, nn), dtype=np.uint8)
    ok = np.zeros(count, dtype=np.uint8)
    for s in range(count):
        c, good = _loop_sample_symplectic(n, bits[s])
        out[s] = c
        ok[s] = good
    return out, ok


def _loop_conjugation_signs(c, h, vecs):
    nn = c.shape[0]
    n = nn // 2
    count = vecs.shape[1]
    # phase exponent of each image X^cx Z^cz in Hermitian form: i^(cx.cz)
    img_phase = np.zeros(nn, dtype=np.int64)
    for k in range(nn):
        w = 0
        for i in range(n):
            w += c[i, k] & c[n + i, k]
        img_phase[k] = (w + 2 * h[k]) % 4
    signs = np.zeros(count, dtype=np.uint8)
    acc = np.zeros(nn, dtype=np.uint8)
    for t in range(count):
        ph = 0
        for i in range(n):
            ph += vecs[i, t] & vecs[n + i, t]
        for i in range(nn):
            acc[i] = 0
        for k in range(nn):
            if vecs[k, t]:
                # (i^a X^xa Z^za)(i^b X^xb Z^zb): moving Z^za past X^xb
                cross = 0
                for i in range(n):
                    cross += acc[n + i] & c[i, k]
                ph += img_phase[k] + 2 * cross
                for i in range(nn):
                    acc[i] ^= c[i, k]
        w = 0
        for i in range(n):
            w += acc[i] & acc[n + i]
        signs[t] = ((ph - w) % 4) // 2
    return signs


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _np_matmul(a, b):
    return ((a.astype(np.int64) @ b.astype(np.int64)) & 1).astype(np.uint8)


def _np_rank(a):
    m = a.copy()
    rows, cols = m.shape
    rank = 0
    for col in range(cols):
        nz = np.flatnonzero(m[rank:, col])
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            m[[rank, piv]] = m[[piv, rank]]
        hits = np.flatnonzero(m[:, col])
        hits = hits[hits != rank]
        m[hits] ^= m[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def _np_solve_random(a, b, free_bits):
    rows, cols = a.shape
    aug = np.concatenate([a, b[:, None]], axis=1).astype(np.uint8)
    pivots = []
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        nz = np.flatnonzero(aug[rank:, col])
        if nz.size == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            aug[[rank, piv]] = aug[[piv, rank]]
        hits = np.flatnonzero(aug[:, col])
        hits = hits[hits != rank]
        aug[hits] ^= aug[rank]
        pivots.append(col)
        rank += 1
    x = np.zeros(cols, dtype=np.uint8)
    if aug[rank:, cols].any():
        return x, False
    free = np.ones(cols, dtype=bool)
    free[pivots] = False
    x[free] = free_bits[:cols][free]
    if rank:
        fx = (aug[:rank, :cols][:, free].astype(np.int64) @ x[free].astype(np.int64)) & 1
        x[pivots] = aug[:rank, cols] ^ fx.astype(np.uint8)
    return x, True


def _np_sample_symplectic(n, bits):
    nn = 2 * n
    cols = np.zeros((nn, nn), dtype=np.uint8)
    pos = 0
    for k in range(nn):
        prev = cols[:, :k]
        a = np.concatenate([prev[n:], prev[:n]], axis=0).T.copy()
        b = np.zeros(k, dtype=np.uint8)
        if k >= n:
            b[k - n] = 1
        while True:
            if pos + nn > bits.shape[0]:
                return cols, False
            x, ok = _np_solve_random(a, b, bits[pos:pos + nn])
            pos += nn
            if not ok:
                return cols, False
            if k >= n:
                break
            stack = np.concatenate([prev.T, x[None, :]], axis=0)
            if _np_rank(stack) == k + 1:
                break
        cols[:, k] = x
    return cols, True


def _np_sample_symplectic_batch(n, bits):
    count = bits.shape[0]
    nn = 2 * n
    out = np.zeros((count, nn, nn), dtype=np.uint8)
    ok = np.zeros(count, dtype=np.uint8)
    for s in range(count):
        out[s], ok[s] = _np_sample_symplectic(n, bits[s])
    return out, ok


def _np_conjugation_signs(c, h, vecs):
    nn = c.shape[0]
    n = nn // 2
    ci = c.astype(np.int64)
    vi = vecs.astype(np.int64)
    img_phase = ((ci[:n] * ci[n:]).sum(axis=0) + 2 * h.astype(np.int64)) % 4
    ph = (vi[:n] * vi[n:]).sum(axis=0)
    acc = np.zeros((nn, vecs.shape[1]), dtype=np.int64)
    for k in range(nn):
        on = vi[k].astype(bool)
        if not on.any():
            continue
        cross = (acc[n:, on] * ci[:n, k, None]).sum(axis=0)
        ph[on] += img_phase[k] + 2 * cross
        acc[:, on] ^= ci[:, k, None]
    w = (acc[:n] * acc[n:]).sum(axis=0)
    return (((ph - w) % 4) // 2).astype(np.uint8)


class _Impl:
    def __init__(self, **fns):
        self.__dict__.update(fns)


numpy_impl = _Impl(
    matmul=_np_matmul,
    rank=_np_rank,
    solve_random=_np_solve_random,
    sample_symplectic=_np_sample_symplectic,
    sample_symplectic_batch=_np_sample_symplectic_batch,
    conjugation_signs=_np_conjugation_signs,
)

numba_impl = None


def _build_numba():
    """Compile the loop kernels, wiring nested calls to compiled callees."""
    import types

    def rebind(fn, **globs):
        g = dict(fn.__globals__)
        g.update(globs)
        return types.FunctionType(fn.__code__, g, fn.__name__, fn.__defaults__, fn.__closure__)

    jit = numba.njit(cache=True)
    matmul = jit(_loop_matmul)
    rank = jit(_loop_rank)
    solve = jit(_loop_solve_random)
    sample = jit(rebind(_loop_sample_symplectic, _loop_solve_random=solve, _loop_rank=rank))
    batch = jit(rebind(_loop_sample_symplectic_batch, _loop_sample_symplectic=sample))
    signs = jit(_loop_conjugation_signs)
    return _Impl(
        matmul=matmul,
        rank=rank,
        solve_random=solve,
        sample_symplectic=sample,
        sample_symplectic_batch=batch,
        conjugation_signs=signs,
    )


if _HAVE_NUMBA:
    numba_impl = _build_numba()

active = numba_impl if USE_NUMBA else numpy_impl
