"""Hot inner loops over bit-encoded Fock states.

Each kernel has a loop version (compiled with numba when available) and a
vectorised numpy version. The public names at the bottom pick one according
to ``floqflux._accel.HAVE_NUMBA``; both are importable for testing and
benchmarking.

Term tables are parallel arrays ``src, dst, ctrl, coef``: the term moves a
particle ``src -> dst`` with amplitude ``coef``, multiplied by ``2 n_ctrl - 1``
when ``ctrl >= 0``.
"""
import numpy as np

from ._accel import HAVE_NUMBA, njit

_ONE = np.uint64(1)


# --------------------------------------------------------------------------
# loop kernels
# --------------------------------------------------------------------------

@njit(cache=True)
def _find(states, x, hint):
    """Index of ``x`` in sorted ``states`` or -1, galloping out from ``hint``.

    Hop images of consecutive states are nearly sorted, so the previous hit
    is usually a few slots away.
    """
    n = states.shape[0]
    if hint < 0 or hint >= n:
        hint = 0
    step = 1
    if states[hint] < x:
        # invariant: states[lo - 1] < x, and hi == n or states[hi] >= x
        lo = hint + 1
        hi = lo
        while hi < n and states[hi] < x:
            lo = hi + 1
            hi = min(lo + step, n)
            step <<= 1
    else:
        # invariant: states[hi] >= x, and lo == 0 or states[lo - 1] < x
        hi = hint
        lo = hi
        while lo > 0 and states[lo - 1] >= x:
            hi = lo - 1
            lo = max(hi - step, 0)
            step <<= 1
    while lo < hi:
        mid = (lo + hi) >> 1
        if states[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo < n and states[lo] == x:
        return lo
    return -1


@njit(cache=True)
def _hop_coo_loop(states, src, dst, ctrl, coef):
    nst = states.shape[0]
    nterm = src.shape[0]
    one = np.uint64(1)
    cap = nst * nterm
    rows = np.empty(cap, np.int64)
    cols = np.empty(cap, np.int64)
    vals = np.empty(cap, np.complex128)
    nnz = 0
    lost = 0
    for t in range(nterm):
        bs = one << np.uint64(src[t])
        bd = one << np.uint64(dst[t])
        has_ctrl = ctrl[t] >= 0
        bc = one << np.uint64(ctrl[t]) if has_ctrl else np.uint64(0)
        hint = 0
        for c in range(nst):
            s = states[c]
            if (s & bs) == 0 or (s & bd) != 0:
                continue
            r = _find(states, (s ^ bs) | bd, hint)
            if r < 0:
                lost += 1
                continue
            hint = r
            amp = coef[t]
            if has_ctrl and (s & bc) == 0:
                amp = -amp
            rows[nnz] = r
            cols[nnz] = c
            vals[nnz] = amp
            nnz += 1
    return rows[:nnz].copy(), cols[:nnz].copy(), vals[:nnz].copy(), lost


@njit(cache=True)
def _hop_expect_loop(states, psi, src, dst):
    nst = states.shape[0]
    npair = src.shape[0]
    one = np.uint64(1)
    out = np.zeros(npair, np.complex128)
    for t in range(npair):
        bs = one << np.uint64(src[t])
        acc = 0.0 + 0.0j
        if src[t] == dst[t]:
            for c in range(nst):
                if states[c] & bs:
                    acc += psi[c].real ** 2 + psi[c].imag ** 2
            out[t] = acc
            continue
        bd = one << np.uint64(dst[t])
        hint = 0
        for c in range(nst):
            s = states[c]
            if (s & bs) == 0 or (s & bd) != 0:
                continue
            r = _find(states, (s ^ bs) | bd, hint)
            if r >= 0:
                acc += np.conj(psi[r]) * psi[c]
                hint = r
        out[t] = acc
    return out


@njit(cache=True)
def _occupations_loop(states, nsites):
    nst = states.shape[0]
    occ = np.zeros((nst, nsites), np.int8)
    one = np.uint64(1)
    for c in range(nst):
        s = states[c]
        for i in range(nsites):
            occ[c, i] = (s >> np.uint64(i)) & one
    return occ


# --------------------------------------------------------------------------
# numpy kernels
# --------------------------------------------------------------------------

def _bit(states, site):
    return (states >> np.uint64(site)) & _ONE


def _hop_coo_numpy(states, src, dst, ctrl, coef):
    nst = states.shape[0]
    rows, cols, vals = [], [], []
    lost = 0
    for t in range(src.shape[0]):
        mask = (_bit(states, src[t]) == 1) & (_bit(states, dst[t]) == 0)
        c = np.nonzero(mask)[0]
        if c.size == 0:
            continue
        s = states[c]
        new = s ^ (_ONE << np.uint64(src[t])) ^ (_ONE << np.uint64(dst[t]))
        r = np.searchsorted(states, new)
        ok = r < nst
        ok[ok] = states[r[ok]] == new[ok]
        lost += int(np.count_nonzero(~ok))
        amp = np.full(c.size, coef[t], dtype=np.complex128)
        if ctrl[t] >= 0:
            amp = amp * (2.0 * _bit(s, ctrl[t]).astype(np.float64) - 1.0)
        rows.append(r[ok])
        cols.append(c[ok])
        vals.append(amp[ok])
    if not rows:
        return (np.empty(0, np.int64), np.empty(0, np.int64),
                np.empty(0, np.complex128), lost)
    return (np.concatenate(rows).astype(np.int64), np.concatenate(cols).astype(np.int64),
            np.concatenate(vals), lost)


def _hop_expect_numpy(states, psi, src, dst):
    nst = states.shape[0]
    out = np.zeros(src.shape[0], np.complex128)
    prob = np.abs(psi) ** 2
    for t in range(src.shape[0]):
        if src[t] == dst[t]:
            out[t] = prob[_bit(states, src[t]) == 1].sum()
            continue
        mask = (_bit(states, src[t]) == 1) & (_bit(states, dst[t]) == 0)
        c = np.nonzero(mask)[0]
        new = states[c] ^ (_ONE << np.uint64(src[t])) ^ (_ONE << np.uint64(dst[t]))
        r = np.searchsorted(states, new)
        ok = r < nst
        ok[ok] = states[r[ok]] == new[ok]
        out[t] = np.sum(np.conj(psi[r[ok]]) * psi[c[ok]])
    return out


def _occupations_numpy(states, nsites):
    shifts = np.arange(nsites, dtype=np.uint64)
    return ((states[:, None] >> shifts[None, :]) & _ONE).astype(np.int8)


# --------------------------------------------------------------------------
# dispatch
# --------------------------------------------------------------------------

if HAVE_NUMBA:
    hop_coo = _hop_coo_loop
    hop_expect = _hop_expect_loop
    occupations = _occupations_loop
else:
    hop_coo = _hop_coo_numpy
    hop_expect = _hop_expect_numpy
    occupations = _occupations_numpy

BACKEND = "numba" if HAVE_NUMBA else "numpy"
