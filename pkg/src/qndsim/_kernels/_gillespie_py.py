"""Pure-Python jump-chain kernel (reference twin of the compiled one).

The compiled kernel must stay bit-compatible with this file: identical
uniform-draw order (wait, then channel, two per event), identical
arithmetic grouping in the rate expressions, and the same cumulative-scan
channel selection. Any change here must be mirrored in the .pyx source.
"""

from __future__ import annotations

import math

import numpy as np

# Channel order is frozen: thermal_up, thermal_down, opt_up1, opt_down1,
# opt_up2, opt_down2. Deltas must match trajectories.CHANNEL_DELTAS.
_DELTAS = (1, -1, 1, -1, 2, -2)

CHUNK = 4096

STATUS_OK = 0
STATUS_TRUNCATED = 1


def run(rng, n0: int, t_final: float, coeffs, n_cap: int):
    """Simulate one jump chain; returns (status, times, states, channels).

    rng: numpy Generator whose uniform stream drives the chain.
    coeffs: 6 floats (th_up, th_down, a1, b1, a2, b2); the per-state rates
    are th_up*(n+1), th_down*n, a1*(n+1), b1*n, a2*(n+1)*(n+2),
    b2*n*(n-1). Status 1 means the state hit n_cap and the run is invalid.
    """
    th_up, th_dn, a1, b1, a2, b2 = (float(c) for c in coeffs)
    buf = rng.random(CHUNK)
    bi = 0
    t = 0.0
    n = int(n0)
    times: list[float] = []
    states: list[int] = []
    chans: list[int] = []
    status = STATUS_OK
    while True:
        fn = float(n)
        r0 = th_up * (fn + 1.0)
        r1 = th_dn * fn
        r2 = a1 * (fn + 1.0)
        r3 = b1 * fn
        r4 = a2 * (fn + 1.0) * (fn + 2.0)
        r5 = b2 * fn * (fn - 1.0)
        total = r0 + r1 + r2 + r3 + r4 + r5
        if total <= 0.0:
            break
        if bi == CHUNK:
            buf = rng.random(CHUNK)
            bi = 0
        u = buf[bi]
        bi += 1
        t_next = t + (-math.log(1.0 - u) / total)
        if t_next >= t_final:
            break
        if bi == CHUNK:
            buf = rng.random(CHUNK)
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
        n = n + _DELTAS[ch]
        t = t_next
        times.append(t)
        states.append(n)
        chans.append(ch)
        if n >= n_cap:
            status = STATUS_TRUNCATED
            break
    return (
        status,
        np.asarray(times, dtype=np.float64),
        np.asarray(states, dtype=np.int64),
        np.asarray(chans, dtype=np.uint8),
    )
