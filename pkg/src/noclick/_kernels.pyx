# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: orbit representatives, sector enumeration, sector
matrix elements of the transverse flip terms, and the DSFF signal sum.

Mirrors ``_kernels_py`` exactly; see that module for conventions.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin, sqrt, M_PI

ctypedef long long i64

cnp.import_array()


cdef inline i64 _reverse(i64 s, int L) noexcept nogil:
    cdef i64 out = 0
    cdef int i
    for i in range(L):
        out |= ((s >> i) & 1) << (L - 1 - i)
    return out


cdef inline i64 _rotate(i64 s, int r, int L, i64 mask) noexcept nogil:
    if r == 0:
        return s
    return ((s << r) | (s >> (L - r))) & mask


cdef inline void _find_rep(i64 s, int L, bint translate, int refl, int z2,
                           i64 mask, i64 *rep, int *rr, int *pp, int *zz) noexcept nogil:
    cdef i64 best = s, base, b, img
    cdef int p, z, r, np_, nz, nr
    rr[0] = 0
    pp[0] = 0
    zz[0] = 0
    np_ = 2 if refl != 0 else 1
    nz = 2 if z2 != 0 else 1
    nr = L if translate else 1
    for p in range(np_):
        base = _reverse(s, L) if p else s
        for z in range(nz):
            b = base ^ mask if z else base
            for r in range(nr):
                img = _rotate(b, r, L, mask)
                if img < best:
                    best = img
                    rr[0] = r
                    pp[0] = p
                    zz[0] = z
    rep[0] = best


cdef inline double complex _char(int r, int p, int z, int L, int k, int refl, int z2) noexcept nogil:
    cdef double ang = 2.0 * M_PI * k * r / L
    cdef double complex chi = cos(ang) + 1j * sin(ang)
    if p:
        chi = chi * refl
    if z:
        chi = chi * z2
    return chi


def representatives(states, int L, int k, bint translate, int refl, int z2):
    cdef i64[::1] st = np.ascontiguousarray(states, dtype=np.int64)
    cdef Py_ssize_t n = st.shape[0], a
    reps_arr = np.empty(n, dtype=np.int64)
    ph_arr = np.empty(n, dtype=np.complex128)
    cdef i64[::1] reps = reps_arr
    cdef double complex[::1] ph = ph_arr
    cdef i64 mask = (<i64>1 << L) - 1, rep
    cdef int r, p, z
    with nogil:
        for a in range(n):
            _find_rep(st[a], L, translate, refl, z2, mask, &rep, &r, &p, &z)
            reps[a] = rep
            ph[a] = _char(r, p, z, L, k, refl, z2).conjugate()
    return reps_arr, ph_arr


def enumerate_reps(int L, int k, bint translate, int refl, int z2):
    cdef i64 mask = (<i64>1 << L) - 1, s, base, b, img
    cdef i64 total = <i64>1 << L
    cdef int p, z, r, np_, nz, nr, order
    cdef bint ok
    cdef double complex stab
    np_ = 2 if refl != 0 else 1
    nz = 2 if z2 != 0 else 1
    nr = L if translate else 1
    order = np_ * nz * nr
    out_r = []
    out_n = []
    for s in range(total):
        ok = True
        stab = 0
        for p in range(np_):
            base = _reverse(s, L) if p else s
            for z in range(nz):
                b = base ^ mask if z else base
                for r in range(nr):
                    img = _rotate(b, r, L, mask)
                    if img < s:
                        ok = False
                        break
                    if img == s:
                        stab = stab + _char(r, p, z, L, k, refl, z2)
                if not ok:
                    break
            if not ok:
                break
        if ok and stab.real > 0.5:
            out_r.append(s)
            out_n.append(sqrt(stab.real / order))
    return np.array(out_r, dtype=np.int64), np.array(out_n, dtype=np.float64)


cdef inline Py_ssize_t _search(const i64[::1] reps, i64 x) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = reps.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if reps[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < reps.shape[0] and reps[lo] == x:
        return lo
    return -1


def offdiag_flips(int L, reps_in, norms_in, int k, bint translate, int refl, int z2, cx_in):
    cdef const i64[::1] reps = np.ascontiguousarray(reps_in, dtype=np.int64)
    cdef const double[::1] norms = np.ascontiguousarray(norms_in, dtype=np.float64)
    cdef const double complex[::1] cx = np.ascontiguousarray(cx_in, dtype=np.complex128)
    cdef Py_ssize_t dim = reps.shape[0], a, b, m = 0
    rows_arr = np.empty(dim * L, dtype=np.int64)
    cols_arr = np.empty(dim * L, dtype=np.int64)
    vals_arr = np.empty(dim * L, dtype=np.complex128)
    cdef i64[::1] rows = rows_arr
    cdef i64[::1] cols = cols_arr
    cdef double complex[::1] vals = vals_arr
    cdef i64 mask = (<i64>1 << L) - 1, rep
    cdef int i, r, p, z
    with nogil:
        for a in range(dim):
            for i in range(L):
                _find_rep(reps[a] ^ (<i64>1 << i), L, translate, refl, z2, mask, &rep, &r, &p, &z)
                b = _search(reps, rep)
                if b < 0:
                    continue
                rows[m] = b
                cols[m] = a
                vals[m] = cx[i] * _char(r, p, z, L, k, refl, z2).conjugate() * norms[b] / norms[a]
                m += 1
    return rows_arr[:m], cols_arr[:m], vals_arr[:m]


def dsff_signal(re_in, im_in, taus_in, thetas):
    cdef const double[::1] re = np.ascontiguousarray(re_in, dtype=np.float64)
    cdef const double[::1] im = np.ascontiguousarray(im_in, dtype=np.float64)
    cdef const double[::1] taus = np.ascontiguousarray(taus_in, dtype=np.float64)
    cdef const double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef Py_ssize_t nt = th.shape[0], ntau = taus.shape[0], n = re.shape[0]
    cdef Py_ssize_t t, j, q
    out_arr = np.empty((nt, ntau), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    proj_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] proj = proj_arr
    cdef double c, s, sr, si, ph
    with nogil:
        for t in range(nt):
            c = cos(th[t])
            s = sin(th[t])
            for q in range(n):
                proj[q] = re[q] * c + im[q] * s
            for j in range(ntau):
                sr = 0.0
                si = 0.0
                for q in range(n):
                    ph = taus[j] * proj[q]
                    sr = sr + cos(ph)
                    si = si + sin(ph)
                out[t, j] = sr + 1j * si
    return out_arr
