# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Bit-mask kernels for bulk enumeration and mapping.

A host graph (tree or forest, at most 64 vertices) is given by parent,
first-child, child-count and depth arrays; children of ``x`` must be the
contiguous ids ``first[x] .. first[x] + nch[x] - 1``.  Sets are uint64 masks.
Monitor failures are reported as error codes and re-raised in Python.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t
from libcpp.vector cimport vector

from hkstar.errors import InvariantViolation, PreconditionError

cnp.import_array()

cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil
    int ctz64 "__builtin_ctzll"(unsigned long long) nogil

DEF MAXN = 64

cdef enum:
    OK = 0
    E_A1 = 1
    E_A2
    E_A3
    E_A4
    E_A5
    E_A6
    E_EVEN1 = 11
    E_EVEN2
    E_EVEN3
    E_EVEN4
    E_ODD1 = 21
    E_ODD2
    E_ODD3
    E_ODD4
    E_ODD5
    E_ODD6
    E_CASPRE = 30
    E_SIZE
    E_INDEP
    E_CLASS

_TAGS = {
    E_A1: "A1", E_A2: "A2", E_A3: "A3", E_A4: "A4", E_A5: "A5", E_A6: "A6",
    E_EVEN1: "even:1", E_EVEN2: "even:2", E_EVEN3: "even:3", E_EVEN4: "even:4",
    E_ODD1: "odd:1", E_ODD2: "odd:2", E_ODD3: "odd:3", E_ODD4: "odd:4",
    E_ODD5: "odd:5", E_ODD6: "odd:6",
    E_CASPRE: "cas-pre", E_SIZE: "size", E_INDEP: "independent", E_CLASS: "class-B",
}

ctypedef struct Host:
    int n
    int parent[MAXN]
    int first[MAXN]
    int nch[MAXN]
    int depth[MAXN]
    int height[MAXN]
    uint64_t desc[MAXN]
    uint64_t kids[MAXN]


cdef inline uint64_t bit(int x) noexcept nogil:
    return (<uint64_t>1) << x


cdef int load_host(Host* H, parent, first, nch, depth) except -1:
    cdef int n = len(parent)
    cdef int x, j, c
    if n > MAXN:
        raise ValueError(f"kernels handle at most {MAXN} vertices, got {n}")
    H.n = n
    for x in range(n):
        H.parent[x] = parent[x]
        H.first[x] = first[x]
        H.nch[x] = nch[x]
        H.depth[x] = depth[x]
        H.kids[x] = 0
        for j in range(H.nch[x]):
            H.kids[x] |= bit(H.first[x] + j)
    # children have larger ids than parents only within level-ordered hosts,
    # so fill subtree masks by repeated relaxation in depth order
    order = sorted(range(n), key=lambda y: -H.depth[y])
    for x in order:
        H.desc[x] = bit(x)
        H.height[x] = 1
        for j in range(H.nch[x]):
            c = H.first[x] + j
            H.desc[x] |= H.desc[c]
            if H.height[c] + 1 > H.height[x]:
                H.height[x] = H.height[c] + 1
    return 0


cdef inline bint independent(Host* H, uint64_t m) noexcept nogil:
    cdef uint64_t rest = m
    cdef int x
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if H.parent[x] >= 0 and (m & bit(H.parent[x])):
            return False
    return True


# --- conditional alternating swap ------------------------------------------

cdef int check_cas(Host* H, uint64_t cur, int size0, int d, int u, uint64_t dside,
                   int* qs, int hs, int ts, int* qt, int ht, int tt,
                   uint64_t qsm, uint64_t qtm, uint64_t vis, uint64_t modified) noexcept nogil:
    cdef uint64_t rest
    cdef int x, p, s, t, ds, dt
    if ts - hs != tt - ht:
        return E_A1
    if popcount64(cur) != size0:
        return E_A1
    rest = vis
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if x != d and x != u and not (vis & bit(H.parent[x])):
            return E_A2
    rest = qsm | qtm
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if H.kids[x] & vis:
            return E_A2
        if modified & bit(x):
            return E_A2
    rest = cur
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if x != d and x != u and (cur & bit(H.parent[x])) and not (qsm & bit(x)):
            return E_A3
    if cur & qtm:
        return E_A4
    rest = qtm
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if x != d and x != u and (cur & bit(H.parent[x])):
            return E_A4
    rest = qsm & dside
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if (H.depth[x] - H.depth[d]) % 2 != 1:
            return E_A5
    rest = qtm & dside
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if (H.depth[x] - H.depth[d]) % 2 != 0:
            return E_A5
    if ts > hs:
        s = qs[hs]
        t = qt[ht]
        if ((dside & bit(s)) != 0) == ((dside & bit(t)) != 0):
            return E_A6
        ds = H.depth[s] - (H.depth[d] if (dside & bit(s)) else H.depth[u])
        dt = H.depth[t] - (H.depth[d] if (dside & bit(t)) else H.depth[u])
        if ds != dt:
            return E_A6
    return OK


cdef int cas_run(Host* H, uint64_t* io, int d, int u, bint monitor) noexcept nogil:
    cdef int qs[MAXN]
    cdef int qt[MAXN]
    cdef int hs = 0, ts = 1, ht = 0, tt = 1
    cdef uint64_t cur = io[0]
    cdef uint64_t dside = H.desc[d]
    cdef uint64_t vis = bit(d) | bit(u)
    cdef uint64_t qsm = bit(u), qtm = bit(d), modified = 0
    cdef int size0 = popcount64(cur)
    cdef int s, t, j, a, b, rc
    qs[0] = u
    qt[0] = d
    while True:
        if monitor:
            rc = check_cas(H, cur, size0, d, u, dside, qs, hs, ts, qt, ht, tt, qsm, qtm, vis, modified)
            if rc:
                return rc
        if hs == ts:
            break
        s = qs[hs]
        hs += 1
        t = qt[ht]
        ht += 1
        qsm &= ~bit(s)
        qtm &= ~bit(t)
        if not (cur & bit(s)):
            continue
        cur = (cur & ~bit(s)) | bit(t)
        modified |= bit(s) | bit(t)
        if (dside & bit(s)) or ((dside & bit(t)) and H.nch[t] > 0):
            if monitor and (H.nch[s] == 0 or H.nch[s] != H.nch[t]):
                return E_A6
            for j in range(H.nch[s]):
                a = H.first[s] + j
                b = H.first[t] + j
                if monitor and (vis & (bit(a) | bit(b))):
                    return E_A2
                qt[tt] = a
                tt += 1
                qs[ts] = b
                ts += 1
                vis |= bit(a) | bit(b)
                qtm |= bit(a)
                qsm |= bit(b)
    io[0] = cur
    return OK


# --- even distance ----------------------------------------------------------

cdef inline void mark(uint64_t bits, uint64_t* mod1, uint64_t* mod2) noexcept nogil:
    mod2[0] |= mod1[0] & bits
    mod1[0] |= bits


cdef int check_even(Host* H, uint64_t cur, int d, int u, int prev_d, int prev_u,
                    uint64_t mod1, uint64_t mod2, uint64_t allowed) noexcept nogil:
    cdef uint64_t rest
    cdef int x
    if prev_d >= 0:
        if d != H.parent[H.parent[prev_d]] or u != H.first[H.first[prev_u]]:
            return E_EVEN1
        if (H.depth[d] - H.depth[u]) != (H.depth[prev_d] - H.depth[prev_u]) - 4:
            return E_EVEN1
    if not (H.desc[u] & bit(d)):
        return E_EVEN1
    if (cur & bit(u)) or (cur & bit(H.parent[u])):
        return E_EVEN2
    if mod2 or (mod1 & ~allowed):
        return E_EVEN3
    rest = cur
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if H.parent[x] >= 0 and (cur & bit(H.parent[x])):
            if not ((cur & bit(d)) and H.parent[x] == d and x == H.first[d]):
                return E_EVEN4
    return OK


cdef int even_run(Host* H, uint64_t* io, int v, int leaf, bint monitor) noexcept nogil:
    cdef uint64_t cur = io[0]
    cdef int size0 = popcount64(cur)
    cdef uint64_t mod1 = bit(v) | bit(leaf), mod2 = 0, allowed = bit(v) | bit(leaf)
    cdef uint64_t region, part, before
    cdef int d, u, prev_d = -1, prev_u = -1, m, cu, cd, c1u, pd, rc
    cur = (cur & ~bit(v)) | bit(leaf)
    d = H.parent[leaf]
    u = H.first[v]
    while True:
        if monitor:
            rc = check_even(H, cur, d, u, prev_d, prev_u, mod1, mod2, allowed)
            if rc:
                return rc
        if not (cur & bit(d)):
            break
        if monitor:
            if d == u:
                return E_EVEN2
            for m in range(1, H.nch[d]):
                cd = H.first[d] + m
                if (cur & bit(cd)) or (mod1 & bit(cd)):
                    return E_EVEN3
        allowed |= bit(d) | bit(u) | bit(H.parent[d]) | bit(H.first[u])
        for m in range(1, H.nch[u]):
            allowed |= H.desc[H.first[u] + m] | H.desc[H.first[d] + m]
        cur = (cur & ~bit(d)) | bit(u)
        mark(bit(d) | bit(u), &mod1, &mod2)
        for m in range(1, H.nch[u]):
            cu = H.first[u] + m
            cd = H.first[d] + m
            if not (cur & bit(cu)):
                continue
            if monitor and (H.height[cd] % 2 != 1 or H.height[cu] <= H.height[cd]):
                return E_CASPRE
            region = H.desc[cd] | H.desc[cu]
            part = cur & region
            if part & bit(cd):
                return E_CASPRE
            before = part
            rc = cas_run(H, &part, cd, cu, monitor)
            if rc:
                return rc
            mark(before ^ part, &mod1, &mod2)
            cur = (cur & ~region) | part
        c1u = H.first[u]
        if not (cur & bit(c1u)):
            break
        pd = H.parent[d]
        if monitor and c1u == pd:
            return E_EVEN1
        cur = (cur & ~bit(c1u)) | bit(pd)
        mark(bit(c1u) | bit(pd), &mod1, &mod2)
        prev_d = d
        prev_u = u
        d = H.parent[pd]
        u = H.first[c1u]
    io[0] = cur
    return OK


# --- odd distance -----------------------------------------------------------

cdef int check_odd(Host* H, uint64_t cur, int size0, int v, bint degenerate,
                   uint64_t Lm, uint64_t Vm, uint64_t path, int* dist,
                   int* qs, int hs, int ts, int* qt, int ht, int tt,
                   uint64_t qsm, uint64_t qtm, uint64_t modified) noexcept nogil:
    cdef uint64_t rest, side, overlap
    cdef int x, p, inner, deg, s, t, k
    cdef bint via_child, on_l_path
    cdef uint64_t sides[2]
    if ts - hs != tt - ht or popcount64(cur) != size0:
        return E_ODD1
    overlap = Lm & Vm
    if overlap and not (degenerate and overlap == bit(v)):
        return E_ODD2
    sides[0] = Lm
    sides[1] = Vm
    for k in range(2):
        side = sides[k]
        inner = 0
        rest = side
        while rest:
            x = ctz64(rest)
            rest &= rest - 1
            if H.parent[x] >= 0 and (side & bit(H.parent[x])):
                inner += 1
        if inner != popcount64(side) - 1:
            return E_ODD2
    rest = qsm | qtm
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        side = Lm if (Lm & bit(x)) else Vm
        deg = popcount64(H.kids[x] & side)
        if H.parent[x] >= 0 and (side & bit(H.parent[x])):
            deg += 1
        if deg > 1 or (modified & bit(x)):
            return E_ODD2
    rest = cur
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        p = H.parent[x]
        if p >= 0 and (cur & bit(p)) and not (qsm & (bit(x) | bit(p))):
            return E_ODD3
    rest = qsm & cur
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        deg = popcount64(H.kids[x] & cur)
        if H.parent[x] >= 0 and (cur & bit(H.parent[x])):
            deg += 1
        if deg != 1:
            return E_ODD3
        via_child = H.nch[x] > 0 and (cur & bit(H.first[x])) != 0
        on_l_path = (Lm & bit(x)) != 0 and (path & bit(x)) != 0
        if via_child != on_l_path:
            return E_ODD3
    if qtm & cur:
        return E_ODD4
    rest = qsm
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if dist[x] % 2 != 1:
            return E_ODD5
    rest = qtm
    while rest:
        x = ctz64(rest)
        rest &= rest - 1
        if dist[x] % 2 != 0:
            return E_ODD5
    if ts > hs:
        s = qs[hs]
        t = qt[ht]
        if not (((Vm & bit(s)) and (Lm & bit(t))) or ((Lm & bit(s)) and (Vm & bit(t)))):
            return E_ODD6
    return OK


cdef inline int push(int x, int to_s, bint to_l, int* qs, int* ts, int* qt, int* tt,
                     uint64_t* qsm, uint64_t* qtm, uint64_t* vis, uint64_t* Lm, uint64_t* Vm,
                     bint monitor) noexcept nogil:
    if monitor and (vis[0] & bit(x)):
        return E_ODD2
    if to_s:
        qs[ts[0]] = x
        ts[0] += 1
        qsm[0] |= bit(x)
    else:
        qt[tt[0]] = x
        tt[0] += 1
        qtm[0] |= bit(x)
    vis[0] |= bit(x)
    if to_l:
        Lm[0] |= bit(x)
    else:
        Vm[0] |= bit(x)
    return OK


cdef int odd_run(Host* H, uint64_t* io, int v, int leaf, uint64_t path, int* dist, bint monitor) noexcept nogil:
    cdef int qs[MAXN]
    cdef int qt[MAXN]
    cdef int hs = 0, ts = 1, ht = 0, tt = 1
    cdef uint64_t cur = io[0]
    cdef int size0 = popcount64(cur)
    cdef int pl = H.parent[leaf]
    cdef int c2v = H.first[v] + 1
    cdef uint64_t Lm = bit(leaf) | bit(pl), Vm = bit(v) | bit(c2v)
    cdef uint64_t vis = Lm | Vm, qsm = bit(pl), qtm = bit(c2v), modified = 0
    cdef bint degenerate = pl == v
    cdef int s, t, m, rc, pt
    cdef bint first_conflict, s_l, t_l
    cur = (cur & ~bit(v)) | bit(leaf)
    qs[0] = pl
    qt[0] = c2v
    while True:
        if monitor:
            rc = check_odd(H, cur, size0, v, degenerate, Lm, Vm, path, dist,
                           qs, hs, ts, qt, ht, tt, qsm, qtm, modified)
            if rc:
                return rc
        if hs == ts:
            break
        s = qs[hs]
        hs += 1
        t = qt[ht]
        ht += 1
        qsm &= ~bit(s)
        qtm &= ~bit(t)
        if not (cur & bit(s)):
            continue
        s_l = (Lm & bit(s)) != 0
        t_l = (Lm & bit(t)) != 0
        first_conflict = s_l and (path & bit(s)) and H.nch[s] > 0 and (cur & bit(H.first[s]))
        cur = (cur & ~bit(s)) | bit(t)
        modified |= bit(s) | bit(t)
        rc = OK
        if H.nch[t] == 0:
            continue
        if first_conflict:
            for m in range(1, H.nch[t]):
                rc |= push(H.first[t] + m, 1, t_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
                rc |= push(H.first[s] + m, 0, s_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
            if monitor and H.parent[s] == v:
                return E_ODD5
            rc |= push(H.parent[s], 0, s_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
            rc |= push(H.first[t], 1, t_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
        elif s_l:
            for m in range(H.nch[t]):
                rc |= push(H.first[s] + m, 0, s_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
                rc |= push(H.first[t] + m, 1, t_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
        else:
            for m in range(1, H.nch[t]):
                rc |= push(H.first[t] + m, 1, t_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
                rc |= push(H.first[s] + m, 0, s_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
            if path & bit(t):
                pt = H.parent[t]
                if monitor and pt != v and (vis & bit(pt)):
                    return E_ODD2
                if pt != v:
                    rc |= push(pt, 1, t_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
                    rc |= push(H.first[s], 0, s_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
            else:
                rc |= push(H.first[t], 1, t_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
                rc |= push(H.first[s], 0, s_l, qs, &ts, qt, &tt, &qsm, &qtm, &vis, &Lm, &Vm, monitor)
        if rc:
            return E_ODD2
    io[0] = cur
    return OK


# --- Python entry points ----------------------------------------------------

def _raise(int rc, uint64_t witness):
    raise InvariantViolation(_TAGS.get(rc, str(rc)), f"kernel monitor tripped on input mask {witness:#x}", witness)


def map_star_batch(parent, first, nch, depth, int v, cnp.uint64_t[::1] masks, bint monitor=True):
    """Apply the star injection for ``v`` to every mask.

    The host must be a single perfect tree whose children are contiguous;
    ``v`` must lie on the path to the leftmost leaf.
    """
    cdef Host H
    load_host(&H, parent, first, nch, depth)
    cdef int leaf = v
    cdef uint64_t path = bit(v)
    while H.nch[leaf] > 0:
        leaf = H.first[leaf]
        path |= bit(leaf)
    if leaf == v:
        raise PreconditionError("distinct", "v is the leftmost leaf")
    cdef int dvl = H.depth[leaf] - H.depth[v]
    cdef int dist[MAXN]
    cdef int x, a, b, steps
    for x in range(H.n):
        a = x
        b = leaf
        steps = 0
        while a != b:
            if H.depth[a] >= H.depth[b]:
                a = H.parent[a]
            else:
                b = H.parent[b]
            steps += 1
        dist[x] = steps
    if dvl % 2 == 1 and H.nch[v] < 2:
        raise PreconditionError("arity", "v needs at least two children")
    cdef Py_ssize_t i, count = masks.shape[0]
    out = np.empty(count, dtype=np.uint64)
    cdef cnp.uint64_t[::1] res = out
    cdef uint64_t m, need = bit(v), forbid = bit(leaf)
    cdef int rc = 0, size0
    with nogil:
        for i in range(count):
            m = masks[i]
            if not (m & need) or (m & forbid):
                rc = -1
                break
            size0 = popcount64(m)
            if dvl % 2 == 0:
                rc = even_run(&H, &m, v, leaf, monitor)
            else:
                rc = odd_run(&H, &m, v, leaf, path, dist, monitor)
            if rc:
                break
            if monitor:
                if popcount64(m) != size0:
                    rc = E_SIZE
                elif not independent(&H, m):
                    rc = E_INDEP
                elif (m & need) or not (m & forbid):
                    rc = E_CLASS
                if rc:
                    break
            res[i] = m
    if rc == -1:
        raise PreconditionError("class-A", f"mask {masks[i]:#x} must contain v and not the leaf")
    if rc:
        _raise(rc, masks[i])
    return out


def cas_batch(parent, first, nch, depth, int d, int u, cnp.uint64_t[::1] masks, bint monitor=True):
    """Run the conditional alternating swap rooted at ``d``/``u`` on every mask."""
    cdef Host H
    load_host(&H, parent, first, nch, depth)
    cdef Py_ssize_t i, count = masks.shape[0]
    out = np.empty(count, dtype=np.uint64)
    cdef cnp.uint64_t[::1] res = out
    cdef uint64_t m
    cdef int rc = 0
    with nogil:
        for i in range(count):
            m = masks[i]
            if not (m & bit(u)) or (m & bit(d)):
                rc = -1
                break
            rc = cas_run(&H, &m, d, u, monitor)
            if rc:
                break
            res[i] = m
    if rc == -1:
        raise PreconditionError("cas-input", f"mask {masks[i]:#x} must contain u and not d")
    if rc:
        _raise(rc, masks[i])
    return out


cdef void _enum(int pos, int m, const int* order, const int* parent, uint64_t forced,
                uint64_t cur, vector[uint64_t]* out) noexcept nogil:
    cdef int x, p
    if pos == m:
        out.push_back(cur)
        return
    x = order[pos]
    if not (forced & bit(x)):
        _enum(pos + 1, m, order, parent, forced, cur, out)
    p = parent[x]
    if p < 0 or not (cur & bit(p)):
        _enum(pos + 1, m, order, parent, forced, cur | bit(x), out)


def enumerate_independent(parent, order, cnp.uint64_t allowed, cnp.uint64_t forced):
    """All independent sets inside ``allowed`` that contain ``forced``.

    ``order`` lists vertices with every parent before its children.
    """
    cdef int n = len(parent)
    if n > MAXN:
        raise ValueError(f"kernels handle at most {MAXN} vertices, got {n}")
    cdef int par[MAXN]
    cdef int ordr[MAXN]
    cdef int m = 0, x, p
    cdef uint64_t blocked = 0
    for x in range(n):
        par[x] = parent[x]
    for x in range(n):
        if forced & bit(x):
            p = par[x]
            if p >= 0:
                if forced & bit(p):
                    return np.empty(0, dtype=np.uint64)
                blocked |= bit(p)
    for x in range(n):
        p = par[x]
        if p >= 0 and (forced & bit(p)):
            blocked |= bit(x)
    if blocked & forced:
        return np.empty(0, dtype=np.uint64)
    for x in order:
        if (allowed & bit(x)) and not (blocked & bit(x)):
            ordr[m] = x
            m += 1
    cdef vector[uint64_t] out
    with nogil:
        _enum(0, m, ordr, par, forced, 0, &out)
    result = np.empty(out.size(), dtype=np.uint64)
    cdef cnp.uint64_t[::1] view = result
    cdef size_t i
    for i in range(out.size()):
        view[i] = out[i]
    return result
