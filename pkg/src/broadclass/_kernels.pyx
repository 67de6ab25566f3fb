# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-frame kernels; see ``_kernels_py`` for the reference semantics."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, NAN
from libc.stdlib cimport malloc, free

cnp.import_array()

cdef enum:
    ST_OK = 0
    ST_FEW_CROSSINGS = 1
    ST_NO_EXTREMA = 2

STATUS_OK = ST_OK
STATUS_FEW_CROSSINGS = ST_FEW_CROSSINGS
STATUS_NO_EXTREMA = ST_NO_EXTREMA


def silence_counts(const unsigned char[::1] mask, const long long[::1] starts,
                   Py_ssize_t frame_len, Py_ssize_t min_run):
    cdef Py_ssize_t nf = starts.shape[0]
    out = np.zeros(nf, dtype=np.int64)
    cdef long long[::1] o = out
    cdef Py_ssize_t f, i, s, run, count
    with nogil:
        for f in range(nf):
            s = starts[f]
            run = 0
            count = 0
            for i in range(s, s + frame_len):
                if mask[i]:
                    run += 1
                else:
                    if run >= min_run:
                        count += run
                    run = 0
            if run >= min_run:
                count += run
            o[f] = count
    return out


cdef inline bint _pos(double v) nogil:
    return v > 0.0


cdef Py_ssize_t _two_pass(Py_ssize_t* idx, double* mag, Py_ssize_t n,
                          double first_mean) nogil:
    # keeps mag > 0.5*first_mean, then mag >= 0.5*mean(kept); compacts in place
    cdef Py_ssize_t i, k = 0
    cdef double acc = 0.0, thr = 0.5 * first_mean
    for i in range(n):
        if mag[i] > thr:
            idx[k] = idx[i]
            mag[k] = mag[i]
            acc += mag[i]
            k += 1
    if k == 0:
        return 0
    thr = 0.5 * (acc / k)
    n = k
    k = 0
    for i in range(n):
        if mag[i] >= thr:
            idx[k] = idx[i]
            mag[k] = mag[i]
            k += 1
    return k


cdef int _frame(const double[::1] x, Py_ssize_t start, Py_ssize_t length,
                Py_ssize_t* pidx, double* pmag, Py_ssize_t* np_out,
                Py_ssize_t* nidx, double* nmag, Py_ssize_t* nn_out,
                Py_ssize_t* first_zc, Py_ssize_t* last_zc) nogil:
    cdef Py_ssize_t i, j, end = start + length, first = -1, last = -1
    cdef Py_ssize_t npos = 0, nneg = 0, pcnt = 0, ncnt = 0, bi
    cdef double psum = 0.0, nsum = 0.0, best, v
    cdef bint sign
    for i in range(start + 1, end):
        if _pos(x[i]) != _pos(x[i - 1]):
            first = i
            break
    i = end - 1
    while i > start:
        if _pos(x[i]) != _pos(x[i - 1]):
            last = i
            break
        i -= 1
    first_zc[0] = first
    last_zc[0] = last
    np_out[0] = 0
    nn_out[0] = 0
    if first < 0 or last <= first:
        first_zc[0] = -1
        last_zc[0] = -1
        return ST_FEW_CROSSINGS
    for i in range(first, last):
        v = x[i]
        if v > 0.0:
            psum += v
            pcnt += 1
        elif v < 0.0:
            nsum += -v
            ncnt += 1
    i = first
    while i < last:
        sign = _pos(x[i])
        best = x[i]
        bi = i
        j = i + 1
        while j < last and _pos(x[j]) == sign:
            if sign:
                if x[j] > best:
                    best = x[j]
                    bi = j
            elif x[j] < best:
                best = x[j]
                bi = j
            j += 1
        if sign:
            pidx[npos] = bi
            pmag[npos] = best
            npos += 1
        elif best < 0.0:
            nidx[nneg] = bi
            nmag[nneg] = -best
            nneg += 1
        i = j
    if pcnt:
        npos = _two_pass(pidx, pmag, npos, psum / pcnt)
    if ncnt:
        nneg = _two_pass(nidx, nmag, nneg, nsum / ncnt)
    np_out[0] = npos
    nn_out[0] = nneg
    if npos == 0 and nneg == 0:
        return ST_NO_EXTREMA
    return ST_OK


def frame_extrema(const double[::1] x, Py_ssize_t start, Py_ssize_t length):
    cdef Py_ssize_t* pidx = <Py_ssize_t*> malloc(length * sizeof(Py_ssize_t))
    cdef double* pmag = <double*> malloc(length * sizeof(double))
    cdef Py_ssize_t* nidx = <Py_ssize_t*> malloc(length * sizeof(Py_ssize_t))
    cdef double* nmag = <double*> malloc(length * sizeof(double))
    cdef Py_ssize_t npos, nneg, fz, lz, i
    if not pidx or not pmag or not nidx or not nmag:
        free(pidx); free(pmag); free(nidx); free(nmag)
        raise MemoryError()
    try:
        _frame(x, start, length, pidx, pmag, &npos, nidx, nmag, &nneg, &fz, &lz)
        max_idx = np.empty(npos, dtype=np.int64)
        max_val = np.empty(npos, dtype=np.float64)
        min_idx = np.empty(nneg, dtype=np.int64)
        min_val = np.empty(nneg, dtype=np.float64)
        for i in range(npos):
            max_idx[i] = pidx[i]
            max_val[i] = pmag[i]
        for i in range(nneg):
            min_idx[i] = nidx[i]
            min_val[i] = -nmag[i]
    finally:
        free(pidx); free(pmag); free(nidx); free(nmag)
    return max_idx, max_val, min_idx, min_val, fz, lz


def extrema_summary(const double[::1] x, const long long[::1] starts, Py_ssize_t length):
    cdef Py_ssize_t nf = starts.shape[0]
    first_arr = np.full(nf, -1, dtype=np.int64)
    last_arr = np.full(nf, -1, dtype=np.int64)
    ade_arr = np.full(nf, np.nan)
    status_arr = np.zeros(nf, dtype=np.int8)
    cdef long long[::1] fo = first_arr
    cdef long long[::1] lo = last_arr
    cdef double[::1] ao = ade_arr
    cdef signed char[::1] so = status_arr
    cdef Py_ssize_t* pidx = <Py_ssize_t*> malloc(length * sizeof(Py_ssize_t))
    cdef double* pmag = <double*> malloc(length * sizeof(double))
    cdef Py_ssize_t* nidx = <Py_ssize_t*> malloc(length * sizeof(Py_ssize_t))
    cdef double* nmag = <double*> malloc(length * sizeof(double))
    cdef Py_ssize_t f, i, k, npos, nneg, fz, lz, lo_i, hi_i
    cdef int st
    cdef double acc
    if not pidx or not pmag or not nidx or not nmag:
        free(pidx); free(pmag); free(nidx); free(nmag)
        raise MemoryError()
    with nogil:
        for f in range(nf):
            st = _frame(x, starts[f], length, pidx, pmag, &npos, nidx, nmag, &nneg, &fz, &lz)
            so[f] = st
            if st != ST_OK:
                continue
            if npos and nneg:
                lo_i = pidx[0] if pidx[0] < nidx[0] else nidx[0]
                hi_i = pidx[npos - 1] if pidx[npos - 1] > nidx[nneg - 1] else nidx[nneg - 1]
            elif npos:
                lo_i = pidx[0]
                hi_i = pidx[npos - 1]
            else:
                lo_i = nidx[0]
                hi_i = nidx[nneg - 1]
            fo[f] = lo_i
            lo[f] = hi_i
            k = npos if npos < nneg else nneg
            if k:
                acc = 0.0
                for i in range(k):
                    # magnitudes: |max - min| == max_mag + min_mag
                    acc += fabs(pmag[i] + nmag[i])
                ao[f] = acc / k
    free(pidx); free(pmag); free(nidx); free(nmag)
    return first_arr, last_arr, ade_arr, status_arr
