# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trial-resolution kernel.

Single-pass C loop over the pre-drawn uniform block.  Must stay
comparison-for-comparison identical to ``_kernels_py.resolve_chunk``: the
test suite asserts bit-identical outputs on every model, and the event-log
determinism contract relies on it.
"""

import numpy as np

from libc.math cimport floor

MODEL_ID_QUANTUM = 0
MODEL_ID_GISIN_GISIN = 1
MODEL_ID_DETERMINISTIC = 2


cdef inline signed char _resolve_side(
    signed char channel,
    double u_trans, double trans,
    double u_eff, double eff,
    double u_dark_plus, double u_dark_minus, double dark,
    unsigned char *double_fire,
) noexcept nogil:
    cdef bint survived = channel != 0 and u_trans < trans and u_eff < eff
    cdef bint plus = (survived and channel == 1) or (u_dark_plus < dark)
    cdef bint minus = (survived and channel == -1) or (u_dark_minus < dark)
    if plus and minus:
        double_fire[0] = 1
        return 0
    if plus:
        return 1
    if minus:
        return -1
    return 0


def resolve_chunk(
    double[:, ::1] u,
    int model_id,
    double[:, ::1] qcum,
    double[::1] a_off,
    double[::1] b_off,
    double[::1] athr,
    double[::1] bthr,
    signed char[::1] det_table,
    bint symmetric,
    double trans_a,
    double trans_b,
    double eff_a,
    double eff_b,
    double dark,
):
    """Resolve one chunk of trials; same contract as the numpy backend."""
    cdef Py_ssize_t n = u.shape[0]
    a_set_arr = np.empty(n, dtype=np.uint8)
    b_set_arr = np.empty(n, dtype=np.uint8)
    a_out_arr = np.empty(n, dtype=np.int8)
    b_out_arr = np.empty(n, dtype=np.int8)
    valid_arr = np.empty(n, dtype=np.uint8)

    cdef unsigned char[::1] a_set = a_set_arr
    cdef unsigned char[::1] b_set = b_set_arr
    cdef signed char[::1] a_out = a_out_arr
    cdef signed char[::1] b_out = b_out_arr
    cdef unsigned char[::1] valid = valid_arr

    if model_id not in (MODEL_ID_QUANTUM, MODEL_ID_GISIN_GISIN, MODEL_ID_DETERMINISTIC):
        raise ValueError(f"unknown model id {model_id!r}")

    cdef Py_ssize_t i
    cdef int a_s, b_s, pair
    cdef signed char a_ch, b_ch
    cdef double x, s, t
    cdef unsigned char dbl

    with nogil:
        for i in range(n):
            a_s = 0 if u[i, 0] < 0.5 else 1
            b_s = 0 if u[i, 1] < 0.5 else 1

            if model_id == 0:  # quantum
                pair = (a_s << 1) | b_s
                x = u[i, 2]
                if x < qcum[pair, 0]:
                    a_ch = 1; b_ch = 1
                elif x < qcum[pair, 1]:
                    a_ch = 1; b_ch = -1
                elif x < qcum[pair, 2]:
                    a_ch = -1; b_ch = 1
                else:
                    a_ch = -1; b_ch = -1
            elif model_id == 1:  # gisin_gisin
                s = u[i, 2] - a_off[a_s]
                s -= floor(s)
                a_ch = 1 if (s <= 0.25 or s >= 0.75) else -1
                if symmetric and not (u[i, 3] < athr[i]):
                    a_ch = 0
                t = u[i, 2] - b_off[b_s]
                t -= floor(t)
                b_ch = -1 if (t <= 0.25 or t >= 0.75) else 1
                if not (u[i, 4] < bthr[i]):
                    b_ch = 0
            else:  # deterministic
                a_ch = det_table[a_s]
                b_ch = det_table[2 + b_s]

            dbl = 0
            a_out[i] = _resolve_side(
                a_ch, u[i, 5], trans_a, u[i, 7], eff_a, u[i, 9], u[i, 10], dark, &dbl
            )
            b_out[i] = _resolve_side(
                b_ch, u[i, 6], trans_b, u[i, 8], eff_b, u[i, 11], u[i, 12], dark, &dbl
            )
            a_set[i] = <unsigned char> a_s
            b_set[i] = <unsigned char> b_s
            valid[i] = dbl

    return a_set_arr, b_set_arr, a_out_arr, b_out_arr, valid_arr
