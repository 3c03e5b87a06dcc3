"""Compiled kernels for fiber-wise boundary-matrix reduction over Z/pZ.

The persistence engine sweeps one-parameter fibers of a multifiltration; each
fiber needs a fresh column reduction because the simplex subset and entry
times change.  The kernel below does all per-fiber work (selection, ordering,
boundary assembly, reduction with clearing, pairing) in one nogil call so the
sweep can run on a thread pool with real parallelism.
"""
from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["fiber_pairs"]


@njit(cache=True, nogil=True)
def fiber_pairs(vals, dims, facet_ptr, facet_idx, facet_sgn, thr, sweep_col,
                max_dim, p, inv):
    """Reduce the boundary matrices of one fiber and return its pairing.

    Arrays describe the whole complex in a fixed base order sorted by
    (dimension, lexicographic vertices); `facet_idx` points at base positions
    and `facet_sgn` holds the alternating boundary signs (+1/-1).

    A simplex belongs to the fiber when its value is <= thr on every axis
    except `sweep_col`; it then enters at its `sweep_col` value.  Fiber
    simplices are ordered by (entry time, dimension, lexicographic vertices):
    a stable sort on entry time inherits the base order for ties.  Columns are
    reduced left to right, one dimension at a time from the top down, so each
    pivot row of dimension d+1 clears the corresponding dimension-d column.

    Returns
    -------
    sel : int64[cnt]      base index of each fiber simplex, in fiber order
    entry : float64[cnt]  entry times, ascending
    ldims : int8[cnt]     dimensions
    is_zero : uint8[cnt]  1 where the reduced column is zero (creators)
    pair : int64[cnt]     for creators: local index of the destroyer, -1 if none
    """
    m, n = vals.shape

    sel = np.empty(m, np.int64)
    cnt = 0
    for i in range(m):
        if dims[i] > max_dim:
            continue
        ok = True
        for j in range(n):
            if j == sweep_col:
                continue
            if vals[i, j] > thr[j]:
                ok = False
                break
        if ok:
            sel[cnt] = i
            cnt += 1

    t = np.empty(cnt, np.float64)
    for a in range(cnt):
        t[a] = vals[sel[a], sweep_col]
    order = np.argsort(t, kind="mergesort")
    sel_s = np.empty(cnt, np.int64)
    entry = np.empty(cnt, np.float64)
    ldims = np.empty(cnt, np.int8)
    for a in range(cnt):
        g = sel[order[a]]
        sel_s[a] = g
        entry[a] = t[order[a]]
        ldims[a] = dims[g]

    pos = np.full(m, -1, np.int64)
    for a in range(cnt):
        pos[sel_s[a]] = a

    colptr = np.zeros(cnt + 1, np.int64)
    for a in range(cnt):
        g = sel_s[a]
        colptr[a + 1] = colptr[a] + (facet_ptr[g + 1] - facet_ptr[g])
    nnz = colptr[cnt]
    rows = np.empty(nnz, np.int64)
    cfs = np.empty(nnz, np.int64)
    for a in range(cnt):
        g = sel_s[a]
        o = colptr[a]
        for kk in range(facet_ptr[g], facet_ptr[g + 1]):
            rows[o] = pos[facet_idx[kk]]
            cfs[o] = facet_sgn[kk] % p
            o += 1
        # column entries sorted by row index (short insertion sort)
        for b in range(colptr[a] + 1, colptr[a + 1]):
            rr = rows[b]
            cc = cfs[b]
            q = b - 1
            while q >= colptr[a] and rows[q] > rr:
                rows[q + 1] = rows[q]
                cfs[q + 1] = cfs[q]
                q -= 1
            rows[q + 1] = rr
            cfs[q + 1] = cc

    is_zero = np.zeros(cnt, np.uint8)
    pair = np.full(cnt, -1, np.int64)
    claimed = np.full(cnt, -1, np.int64)
    for a in range(cnt):
        if ldims[a] == 0:
            is_zero[a] = 1  # vertices have empty boundary

    cap = max(16, nnz * 2)
    prow = np.empty(cap, np.int64)
    pcf = np.empty(cap, np.int64)
    pstart = np.zeros(cnt, np.int64)
    plen = np.zeros(cnt, np.int64)
    pool_n = 0

    wr = np.empty(cnt, np.int64)
    wc = np.empty(cnt, np.int64)
    tr = np.empty(cnt, np.int64)
    tc = np.empty(cnt, np.int64)

    dmax = 0
    for a in range(cnt):
        if ldims[a] > dmax:
            dmax = ldims[a]

    for d in range(dmax, 0, -1):
        for a in range(cnt):
            if ldims[a] != d or is_zero[a]:
                continue
            ln = 0
            for b in range(colptr[a], colptr[a + 1]):
                wr[ln] = rows[b]
                wc[ln] = cfs[b]
                ln += 1
            while ln > 0:
                low = wr[ln - 1]
                owner = claimed[low]
                if owner < 0:
                    break
                s0 = pstart[owner]
                le = plen[owner]
                fac = (p - (wc[ln - 1] * inv[pcf[s0 + le - 1]]) % p) % p
                # merge wr/wc with fac * pool[owner]
                ml = 0
                ia = 0
                ib = s0
                eb = s0 + le
                while ia < ln and ib < eb:
                    ra = wr[ia]
                    rb = prow[ib]
                    if ra < rb:
                        tr[ml] = ra
                        tc[ml] = wc[ia]
                        ia += 1
                        ml += 1
                    elif rb < ra:
                        tr[ml] = rb
                        tc[ml] = (fac * pcf[ib]) % p
                        ib += 1
                        ml += 1
                    else:
                        cc = (wc[ia] + fac * pcf[ib]) % p
                        ia += 1
                        ib += 1
                        if cc != 0:
                            tr[ml] = ra
                            tc[ml] = cc
                            ml += 1
                while ia < ln:
                    tr[ml] = wr[ia]
                    tc[ml] = wc[ia]
                    ia += 1
                    ml += 1
                while ib < eb:
                    tr[ml] = prow[ib]
                    tc[ml] = (fac * pcf[ib]) % p
                    ib += 1
                    ml += 1
                for z in range(ml):
                    wr[z] = tr[z]
                    wc[z] = tc[z]
                ln = ml
            if ln == 0:
                is_zero[a] = 1
            else:
                low = wr[ln - 1]
                claimed[low] = a
                pair[low] = a
                is_zero[low] = 1  # clearing: the row's own column reduces to zero
                if pool_n + ln > cap:
                    newcap = cap * 2
                    if newcap < pool_n + ln:
                        newcap = pool_n + ln
                    p2 = np.empty(newcap, np.int64)
                    c2 = np.empty(newcap, np.int64)
                    for z in range(pool_n):
                        p2[z] = prow[z]
                        c2[z] = pcf[z]
                    prow = p2
                    pcf = c2
                    cap = newcap
                pstart[a] = pool_n
                plen[a] = ln
                for z in range(ln):
                    prow[pool_n + z] = wr[z]
                    pcf[pool_n + z] = wc[z]
                pool_n += ln

    return sel_s, entry, ldims, is_zero, pair
