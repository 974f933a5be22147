# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled jump-chain kernel.

Bit-compatible twin of _gillespie_py: same uniform-draw order (wait then
channel), same arithmetic grouping, same cumulative-scan selection. C
doubles and CPython floats share IEEE-754 semantics and both backends call
the platform libm log, so a given seed yields identical event lists.
"""

from libc.math cimport log

import numpy as np

cimport numpy as cnp

cnp.import_array()

CHUNK = 4096

STATUS_OK = 0
STATUS_TRUNCATED = 1


def run(object rng, long n0, double t_final, coeffs, long n_cap):
    """Simulate one jump chain; returns (status, times, states, channels).

    Mirrors _gillespie_py.run exactly; see that module for the contract.
    """
    cdef double th_up = float(coeffs[0])
    cdef double th_dn = float(coeffs[1])
    cdef double a1 = float(coeffs[2])
    cdef double b1 = float(coeffs[3])
    cdef double a2 = float(coeffs[4])
    cdef double b2 = float(coeffs[5])

    cdef Py_ssize_t chunk = CHUNK
    cdef cnp.ndarray[cnp.float64_t, ndim=1] buf_arr = rng.random(chunk)
    cdef double* buf = <double*> cnp.PyArray_DATA(buf_arr)
    cdef Py_ssize_t bi = 0

    cdef Py_ssize_t cap = 1024
    cdef cnp.ndarray[cnp.float64_t, ndim=1] times = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] states = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] chans = np.empty(cap, dtype=np.uint8)
    cdef Py_ssize_t count = 0

    cdef double t = 0.0
    cdef long n = n0
    cdef int status = STATUS_OK
    cdef double fn, r0, r1, r2, r3, r4, r5, total, u, v, acc, t_next
    cdef int ch

    while True:
        fn = <double> n
        r0 = th_up * (fn + 1.0)
        r1 = th_dn * fn
        r2 = a1 * (fn + 1.0)
        r3 = b1 * fn
        r4 = a2 * (fn + 1.0) * (fn + 2.0)
        r5 = b2 * fn * (fn - 1.0)
        total = r0 + r1 + r2 + r3 + r4 + r5
        if total <= 0.0:
            break
        if bi == chunk:
            buf_arr = rng.random(chunk)
            buf = <double*> cnp.PyArray_DATA(buf_arr)
            bi = 0
        u = buf[bi]
        bi += 1
        t_next = t + (-log(1.0 - u) / total)
        if t_next >= t_final:
            break
        if bi == chunk:
            buf_arr = rng.random(chunk)
            buf = <double*> cnp.PyArray_DATA(buf_arr)
            bi = 0
        v = buf[bi] * total
        bi += 1
        ch = 5
        acc = r0
        if v < acc:
            ch = 0
        else:
            acc = acc + r1
            if v < acc:
                ch = 1
            else:
                acc = acc + r2
                if v < acc:
                    ch = 2
                else:
                    acc = acc + r3
                    if v < acc:
                        ch = 3
                    else:
                        acc = acc + r4
                        if v < acc:
                            ch = 4
        if ch == 0 or ch == 2:
            n = n + 1
        elif ch == 1 or ch == 3:
            n = n - 1
        elif ch == 4:
            n = n + 2
        else:
            n = n - 2
        t = t_next
        if count == cap:
            cap = cap * 2
            times = np.resize(times, cap)
            states = np.resize(states, cap)
            chans = np.resize(chans, cap)
        times[count] = t
        states[count] = n
        chans[count] = <unsigned char> ch
        count += 1
        if n >= n_cap:
            status = STATUS_TRUNCATED
            break
    return (
        status,
        times[:count].copy(),
        states[:count].copy(),
        chans[:count].copy(),
    )
