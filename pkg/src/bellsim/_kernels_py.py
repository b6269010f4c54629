"""Pure numpy trial-resolution kernel (fallback backend).

This is the reference implementation of the per-chunk hot loop.  The
compiled backend in ``_ckernel.pyx`` implements the same comparisons on the
same float64 inputs, so both backends produce bit-identical outputs; any
transcendental per-trial quantities (the hidden-angle detection thresholds)
are precomputed by the driver and passed in as columns.

Uniform draw layout, one row of 13 per trial (unused columns are still drawn
so that every model consumes the same stream):

    0  station-A setting choice          1  station-B setting choice
    2  model primary draw (joint-outcome draw or hidden angle)
    3  model-level detection draw, A     4  model-level detection draw, B
    5  arm transmission draw, A          6  arm transmission draw, B
    7  detector efficiency draw, A       8  detector efficiency draw, B
    9  dark draw, A+    10 dark draw, A-   11 dark draw, B+   12 dark draw, B-
"""

from __future__ import annotations

import numpy as np

N_DRAW_COLS = 13

MODEL_ID_QUANTUM = 0
MODEL_ID_GISIN_GISIN = 1
MODEL_ID_DETERMINISTIC = 2

VALID_OK = 0
VALID_DOUBLE_FIRE = 1


def _resolve_side(channel, u_trans, trans, u_eff, eff, u_dark_plus, u_dark_minus, dark):
    """Detection layer for one station: losses, efficiency, dark counts."""
    survived = (channel != 0) & (u_trans < trans) & (u_eff < eff)
    plus = (survived & (channel == 1)) | (u_dark_plus < dark)
    minus = (survived & (channel == -1)) | (u_dark_minus < dark)
    double = plus & minus
    out = np.where(plus, 1, np.where(minus, -1, 0)).astype(np.int8)
    out[double] = 0
    return out, double


def resolve_chunk(
    u,
    model_id,
    qcum,
    a_off,
    b_off,
    athr,
    bthr,
    det_table,
    symmetric,
    trans_a,
    trans_b,
    eff_a,
    eff_b,
    dark,
):
    """Resolve one chunk of trials from pre-drawn uniforms.

    Returns (a_set, b_set, a_out, b_out, valid) as numpy arrays; outcomes are
    {+1, -1, 0} with 0 = no detection, valid is 0 (ok) or 1 (a double fire on
    either side, excluded downstream).
    """
    a_set = (u[:, 0] >= 0.5).astype(np.uint8)
    b_set = (u[:, 1] >= 0.5).astype(np.uint8)

    if model_id == MODEL_ID_QUANTUM:
        pair = (a_set.astype(np.intp) << 1) | b_set
        x = u[:, 2]
        cums = qcum[pair]
        idx = (
            (x >= cums[:, 0]).astype(np.int8)
            + (x >= cums[:, 1]).astype(np.int8)
            + (x >= cums[:, 2]).astype(np.int8)
        )
        a_ch = np.where(idx < 2, 1, -1).astype(np.int8)
        b_ch = np.where((idx == 0) | (idx == 2), 1, -1).astype(np.int8)
    elif model_id == MODEL_ID_GISIN_GISIN:
        # sign(cos(theta - 2*angle)) in exact fractional-turn arithmetic:
        # the sign is + iff frac(u - angle/pi) lies in [0, 1/4] or [3/4, 1).
        s = u[:, 2] - a_off[a_set]
        s -= np.floor(s)
        a_ch = np.where((s <= 0.25) | (s >= 0.75), 1, -1).astype(np.int8)
        if symmetric:
            a_ch = np.where(u[:, 3] < athr, a_ch, 0).astype(np.int8)
        t = u[:, 2] - b_off[b_set]
        t -= np.floor(t)
        b_ch = np.where((t <= 0.25) | (t >= 0.75), -1, 1).astype(np.int8)
        b_ch = np.where(u[:, 4] < bthr, b_ch, 0).astype(np.int8)
    elif model_id == MODEL_ID_DETERMINISTIC:
        a_ch = det_table[a_set]
        b_ch = det_table[2 + b_set.astype(np.intp)]
    else:
        raise ValueError(f"unknown model id {model_id!r}")

    a_out, a_dbl = _resolve_side(a_ch, u[:, 5], trans_a, u[:, 7], eff_a, u[:, 9], u[:, 10], dark)
    b_out, b_dbl = _resolve_side(b_ch, u[:, 6], trans_b, u[:, 8], eff_b, u[:, 11], u[:, 12], dark)
    valid = (a_dbl | b_dbl).astype(np.uint8)
    return a_set, b_set, a_out, b_out, valid
