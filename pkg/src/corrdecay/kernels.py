"""Inner loops: brute-force enumeration and self-avoiding-walk tree evaluation.

Both ``*_loop`` kernels are compiled with numba when available.  With
``CORRDECAY_DISABLE_NUMBA=1`` the oracle switches to a chunked, vectorised
numpy enumeration (:func:`enumerate_numpy`) and the SAW kernel runs as
interpreted Python.
"""

import numpy as np

from ._accel import NUMBA_ENABLED, njit


@njit
def _lam_part(cnt, cls_log, cls_zero):
    total = 0.0
    for k in range(cnt.shape[0]):
        if cnt[k] > 0:
            if cls_zero[k]:
                return -np.inf
            total += cnt[k] * cls_log[k]
    return total


@njit
def _log_weight(cnt, cls_log, cls_zero, n_plus, n_minus, log_beta, log_gamma):
    lw = _lam_part(cnt, cls_log, cls_zero)
    if n_plus > 0:
        lw += n_plus * log_beta
    if n_minus > 0:
        lw += n_minus * log_gamma
    return lw


@njit
def enumerate_gray_loop(indptr, indices, spins0, free, cls, cls_log, cls_zero,
                        log_beta, log_gamma, track):
    """Sum weights over all spin assignments to ``free`` in Gray-code order.

    ``spins0`` holds the starting configuration (pins set, free vertices +).
    Vertex activities are grouped into classes so the log-weight is always a
    fresh integer-count combination, never a running float sum.

    Returns ``(mx, s, s_plus)``: total weight is ``exp(mx) * s`` and the weight
    with ``track[j]`` at spin + is ``exp(mx) * s_plus[j]``.
    """
    n = spins0.shape[0]
    spins = spins0.copy()
    cnt = np.zeros(cls_log.shape[0], dtype=np.int64)
    n_plus = 0
    n_minus = 0
    for v in range(n):
        if spins[v] < 0:
            cnt[cls[v]] += 1
        for p in range(indptr[v], indptr[v + 1]):
            w = indices[p]
            if w > v and spins[v] == spins[w]:
                if spins[v] > 0:
                    n_plus += 1
                else:
                    n_minus += 1
    ntrack = track.shape[0]
    # Neumaier-compensated sums; c / c_plus hold the running corrections
    s_plus = np.zeros(ntrack)
    c_plus = np.zeros(ntrack)
    s = 0.0
    c = 0.0
    mx = -np.inf
    k = free.shape[0]
    total = 1 << k
    for i in range(total):
        if i > 0:
            # flip the free vertex indexed by the lowest set bit of i
            b = 0
            t = i
            while (t & 1) == 0:
                t >>= 1
                b += 1
            v = free[b]
            sv = spins[v]
            for p in range(indptr[v], indptr[v + 1]):
                sw = spins[indices[p]]
                if sw == sv:
                    if sv > 0:
                        n_plus -= 1
                    else:
                        n_minus -= 1
                else:
                    if sv > 0:
                        n_minus += 1
                    else:
                        n_plus += 1
            spins[v] = -sv
            if sv > 0:
                cnt[cls[v]] += 1
            else:
                cnt[cls[v]] -= 1
        lw = _log_weight(cnt, cls_log, cls_zero, n_plus, n_minus, log_beta, log_gamma)
        if lw == -np.inf:
            continue
        if lw > mx:
            if mx > -np.inf:
                scale = np.exp(mx - lw)
                s *= scale
                c *= scale
                for j in range(ntrack):
                    s_plus[j] *= scale
                    c_plus[j] *= scale
            mx = lw
        wgt = np.exp(lw - mx)
        t = s + wgt
        if abs(s) >= wgt:
            c += (s - t) + wgt
        else:
            c += (wgt - t) + s
        s = t
        for j in range(ntrack):
            if spins[track[j]] > 0:
                sj = s_plus[j]
                t = sj + wgt
                if abs(sj) >= wgt:
                    c_plus[j] += (sj - t) + wgt
                else:
                    c_plus[j] += (wgt - t) + sj
                s_plus[j] = t
    for j in range(ntrack):
        s_plus[j] += c_plus[j]
    return mx, s + c, s_plus


def enumerate_numpy(edges, spins0, free, cls, cls_log, cls_zero, log_beta, log_gamma, track,
                    chunk_bits=16):
    """Vectorised counterpart of :func:`enumerate_gray_loop` (plain binary order)."""
    k = len(free)
    eu = np.asarray([e[0] for e in edges], dtype=np.int64)
    ev = np.asarray([e[1] for e in edges], dtype=np.int64)
    ncls = len(cls_log)
    cls_log = np.where(cls_zero, 0.0, cls_log)
    free = np.asarray(free, dtype=np.int64)
    track = np.asarray(track, dtype=np.int64)
    chunk = 1 << min(k, chunk_bits)
    shifts = np.arange(k, dtype=np.int64)
    log_s = -np.inf
    log_sp = np.full(len(track), -np.inf)
    for start in range(0, 1 << k, chunk):
        idx = np.arange(start, start + chunk, dtype=np.int64)
        bits = (idx[:, None] >> shifts[None, :]) & 1
        spins = np.broadcast_to(spins0, (chunk, len(spins0))).copy()
        spins[:, free] = 1 - 2 * bits
        su, sv = spins[:, eu], spins[:, ev]
        n_plus = ((su > 0) & (sv > 0)).sum(axis=1)
        n_minus = ((su < 0) & (sv < 0)).sum(axis=1)
        minus = spins < 0
        lw = np.zeros(chunk)
        dead = np.zeros(chunk, dtype=bool)
        for c in range(ncls):
            cnt = (minus & (cls == c)[None, :]).sum(axis=1)
            lw += cnt * cls_log[c]
            if cls_zero[c]:
                dead |= cnt > 0
        for cnt, lg in ((n_plus, log_beta), (n_minus, log_gamma)):
            if lg == -np.inf:
                dead |= cnt > 0
            else:
                lw += cnt * lg
        lw[dead] = -np.inf
        if np.all(dead):
            continue
        mx = lw.max()
        w = np.exp(lw - mx)
        log_s = np.logaddexp(log_s, mx + np.log(w.sum()))
        if len(track):
            sp = (w[:, None] * (spins[:, track] > 0)).sum(axis=0)
            with np.errstate(divide="ignore"):
                log_sp = np.logaddexp(log_sp, mx + np.log(sp))
    return log_s, log_sp


@njit
def _h(x, beta):
    return (beta + (1.0 - beta) * x) / (1.0 - (1.0 - beta) * x)


@njit
def saw_interval_loop(indptr, indices, pins, lam, beta, root, depth_limit, priority, node_cap):
    """Enclosure of the root marginal of the SAW tree truncated at ``depth_limit``.

    Depth-first over self-avoiding walks from ``root`` with an explicit stack;
    nothing but the current walk is stored.  A walk returning to a vertex
    ``x`` (left earlier through ``y``) from ``u`` closes a cycle and becomes a
    leaf pinned + if ``priority[u] > priority[y]`` and - otherwise.
    Extension nodes at depth ``depth_limit`` are free leaves ``[0, 1]``.

    Returns ``(lo, hi, nodes, complete)`` where ``complete`` is False if the
    node budget ran out (``lo``/``hi`` are then meaningless) and ``nodes``
    counts every tree node visited.
    """
    n = indptr.shape[0] - 1
    if depth_limit <= 0:
        return 0.0, 1.0, 1, True
    maxk = min(depth_limit, n) + 1
    vert = np.empty(maxk, dtype=np.int64)
    ptr = np.empty(maxk, dtype=np.int64)
    prod_lo = np.empty(maxk)  # prod of h(hi_child): gives the node's lower end
    prod_hi = np.empty(maxk)
    onpath = np.full(n, -1, dtype=np.int64)
    h0 = beta
    h1 = 1.0 / beta
    k = 0
    vert[0] = root
    onpath[root] = 0
    ptr[0] = indptr[root]
    prod_lo[0] = 1.0
    prod_hi[0] = 1.0
    nodes = 1
    while True:
        u = vert[k]
        if ptr[k] < indptr[u + 1]:
            x = indices[ptr[k]]
            ptr[k] += 1
            if k > 0 and x == vert[k - 1]:
                continue
            if pins[x] != 0 or onpath[x] >= 0:
                nodes += 1
                if pins[x] != 0:
                    plus = pins[x] > 0
                else:
                    y = vert[onpath[x] + 1]
                    plus = priority[u] > priority[y]
                hv = h1 if plus else h0
                prod_lo[k] *= hv
                prod_hi[k] *= hv
                continue
            nodes += 1
            if nodes > node_cap:
                return 0.0, 1.0, nodes, False
            if k + 1 >= depth_limit:
                prod_lo[k] *= h1
                prod_hi[k] *= h0
                continue
            k += 1
            vert[k] = x
            onpath[x] = k
            ptr[k] = indptr[x]
            prod_lo[k] = 1.0
            prod_hi[k] = 1.0
        else:
            lo = 1.0 / (1.0 + lam[u] * prod_lo[k])
            hi = 1.0 / (1.0 + lam[u] * prod_hi[k])
            onpath[u] = -1
            if k == 0:
                return lo, hi, nodes, True
            k -= 1
            prod_lo[k] *= _h(hi, beta)
            prod_hi[k] *= _h(lo, beta)


@njit
def saw_tree_height(indptr, indices, pins, root):
    """Length of the longest self-avoiding walk from ``root`` through free vertices."""
    n = indptr.shape[0] - 1
    vert = np.empty(n + 1, dtype=np.int64)
    ptr = np.empty(n + 1, dtype=np.int64)
    onpath = np.zeros(n, dtype=np.bool_)
    k = 0
    vert[0] = root
    onpath[root] = True
    ptr[0] = indptr[root]
    best = 0
    while k >= 0:
        u = vert[k]
        if ptr[k] < indptr[u + 1]:
            x = indices[ptr[k]]
            ptr[k] += 1
            if onpath[x] or pins[x] != 0:
                continue
            k += 1
            vert[k] = x
            onpath[x] = True
            ptr[k] = indptr[x]
            if k > best:
                best = k
                if best == n - 1:
                    return best
        else:
            onpath[u] = False
            k -= 1
    return best


__all__ = [
    "NUMBA_ENABLED",
    "enumerate_gray_loop",
    "enumerate_numpy",
    "saw_interval_loop",
    "saw_tree_height",
]
