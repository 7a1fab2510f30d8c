# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled amplitude kernels.

Every function works in place on a contiguous 1-D amplitude array of
length ``2**n`` holding either ``float64`` or ``complex128`` values.
Qubit ``q`` is bit ``q`` of the amplitude index.
"""

import numpy as np
cimport numpy as cnp

from libc.math cimport M_SQRT1_2

cnp.import_array()

ctypedef unsigned long long u64

ctypedef fused amp_t:
    double
    double complex


cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil


cdef inline u64 _insert_zero(u64 k, int bit) nogil:
    cdef u64 low = k & ((<u64>1 << bit) - 1)
    return ((k >> bit) << (bit + 1)) | low


def apply_ry(amp_t[::1] psi, int q, double cos_half, double sin_half):
    cdef u64 dim = <u64>psi.shape[0]
    cdef u64 step = <u64>1 << q
    cdef u64 base, j, k, i0, i1
    cdef amp_t a, b
    with nogil:
        if step >= 8:
            base = 0
            while base < dim:
                for j in range(step):
                    i0 = base + j
                    i1 = i0 + step
                    a = psi[i0]
                    b = psi[i1]
                    psi[i0] = cos_half * a - sin_half * b
                    psi[i1] = sin_half * a + cos_half * b
                base += step << 1
        else:
            # short strides: a flat loop avoids a tiny inner trip count
            for k in range(dim >> 1):
                i0 = _insert_zero(k, q)
                i1 = i0 | step
                a = psi[i0]
                b = psi[i1]
                psi[i0] = cos_half * a - sin_half * b
                psi[i1] = sin_half * a + cos_half * b


def apply_h(amp_t[::1] psi, int q):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef u64 step = <u64>1 << q
    cdef u64 base, j, i0, i1
    cdef amp_t a, b
    with nogil:
        base = 0
        while base < <u64>dim:
            for j in range(step):
                i0 = base + j
                i1 = i0 + step
                a = psi[i0]
                b = psi[i1]
                psi[i0] = (a + b) * M_SQRT1_2
                psi[i1] = (a - b) * M_SQRT1_2
            base += step << 1


def apply_x(amp_t[::1] psi, int q):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef u64 step = <u64>1 << q
    cdef u64 base, j, i0
    cdef amp_t a
    with nogil:
        base = 0
        while base < <u64>dim:
            for j in range(step):
                i0 = base + j
                a = psi[i0]
                psi[i0] = psi[i0 + step]
                psi[i0 + step] = a
            base += step << 1


def apply_cnot(amp_t[::1] psi, int control, int target):
    cdef u64 quarter = (<u64>psi.shape[0]) >> 2
    cdef int lo = control if control < target else target
    cdef int hi = target if control < target else control
    cdef u64 cbit = <u64>1 << control
    cdef u64 tbit = <u64>1 << target
    cdef u64 k, i0
    cdef amp_t a
    with nogil:
        for k in range(quarter):
            i0 = _insert_zero(_insert_zero(k, lo), hi) | cbit
            a = psi[i0]
            psi[i0] = psi[i0 | tbit]
            psi[i0 | tbit] = a


def flip_overlap(amp_t[::1] psi, u64 mask):
    """Return ``<psi| X_mask |psi>`` as a complex number."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef double re = 0.0, im = 0.0
    cdef double complex z
    with nogil:
        for i in range(dim):
            if amp_t is double:
                re += psi[i] * psi[i ^ mask]
            else:
                z = psi[i].conjugate() * psi[i ^ mask]
                re += z.real
                im += z.imag
    return complex(re, im)


def diag_expectation(amp_t[::1] psi, const double[::1] diag):
    """Return ``sum_i diag[i] |psi[i]|^2``."""
    cdef Py_ssize_t i, dim = psi.shape[0]
    cdef double acc = 0.0
    with nogil:
        for i in range(dim):
            if amp_t is double:
                acc += diag[i] * psi[i] * psi[i]
            else:
                acc += diag[i] * (psi[i].real * psi[i].real + psi[i].imag * psi[i].imag)
    return acc


def parity_expectation(amp_t[::1] psi, u64 mask):
    """Return ``<psi| Z_mask |psi>``."""
    cdef Py_ssize_t i, dim = psi.shape[0]
    cdef double acc = 0.0, p
    with nogil:
        for i in range(dim):
            if amp_t is double:
                p = psi[i] * psi[i]
            else:
                p = psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
            if __builtin_popcountll(<u64>i & mask) & 1:
                acc -= p
            else:
                acc += p
    return acc


def build_diagonal(int n, const u64[::1] masks, const double[::1] coeffs):
    """Diagonal of ``sum_t coeffs[t] Z_{masks[t]}`` over all ``2**n`` basis states."""
    cdef Py_ssize_t dim = <Py_ssize_t>1 << n
    cdef Py_ssize_t nt = masks.shape[0]
    out_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, t
    cdef double acc
    with nogil:
        for i in range(dim):
            acc = 0.0
            for t in range(nt):
                if __builtin_popcountll(<u64>i & masks[t]) & 1:
                    acc -= coeffs[t]
                else:
                    acc += coeffs[t]
            out[i] = acc
    return out_arr


def flip_accumulate(amp_t[::1] out, const amp_t[::1] v, u64 mask, double coeff):
    """``out[i] += coeff * v[i ^ mask]``."""
    cdef Py_ssize_t i, dim = out.shape[0]
    with nogil:
        for i in range(dim):
            out[i] += coeff * v[i ^ mask]
