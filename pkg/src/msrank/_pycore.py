"""Pure numpy implementation of the compiled kernels in ``_core.pyx``.

Same signatures and in/out conventions.  Windows are processed per left
endpoint as dense blocks, so results agree with the compiled core up to
floating-point summation order.
"""

import numpy as np


def _kernel(code, beta, u):
    if code == 0:
        return np.ones_like(u)
    v = 2.0 * u - 1.0
    if code == 1:
        return 1.0 - v * v
    return 1.0 - np.abs(v) ** beta


def _start_groups(starts):
    """Yield ``(start, lo, hi)`` slices of consecutive windows sharing a start."""
    if len(starts) == 0:
        return
    cuts = np.flatnonzero(np.diff(starts)) + 1
    bounds = np.concatenate(([0], cuts, [len(starts)]))
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        yield int(starts[lo]), int(lo), int(hi)


def build_coefficients(x, groups, code, beta, use_ranks, starts, lengths, offsets, coeffs, sumsq):
    x = np.asarray(x)
    groups = np.asarray(groups)
    for s, lo, hi in _start_groups(starts):
        lens = np.asarray(lengths[lo:hi])
        lmax = int(lens.max())
        xs = x[s : s + lmax]
        span = xs[lens - 1] - xs[0]
        u = (xs[None, :] - xs[0]) / span[:, None]
        c = _kernel(code, beta, u)
        if use_ranks:
            g = groups[s : s + lmax]
            less = np.cumsum(g[None, :] < g[:, None], axis=1)
            equal = np.cumsum(g[None, :] == g[:, None], axis=1)
            ranks = less[:, lens - 1] + 0.5 * equal[:, lens - 1] + 0.5
            c = c * ranks.T
        mask = np.arange(lmax)[None, :] < lens[:, None]
        c = np.where(mask, c, 0.0)
        off = int(offsets[lo])
        flat = c[mask]
        coeffs[off : off + flat.size] = flat
        sumsq[lo:hi] = np.einsum("ij,ij->i", c, c)


def _dense_block(coeffs, lengths, offsets, lo, hi):
    lens = np.asarray(lengths[lo:hi])
    lmax = int(lens.max())
    mask = np.arange(lmax)[None, :] < lens[:, None]
    block = np.zeros((hi - lo, lmax))
    off = int(offsets[lo])
    block[mask] = coeffs[off : off + int(lens.sum())]
    return block, lmax


def _stats(block, denom, values):
    num = values @ block.T
    safe = np.where(denom > 0, denom, 1.0)
    return np.where(denom > 0, num / safe, 0.0)


def max_excess(coeffs, starts, lengths, offsets, denom, penalty, values, out):
    values = np.asarray(values)
    denom = np.asarray(denom)
    penalty = np.asarray(penalty)
    for s, lo, hi in _start_groups(starts):
        block, lmax = _dense_block(coeffs, lengths, offsets, lo, hi)
        t = _stats(block, denom[lo:hi], values[:, s : s + lmax])
        excess = np.abs(t) - penalty[lo:hi]
        np.maximum(out, excess.max(axis=1), out=out)


def window_stats(coeffs, starts, lengths, offsets, denom, values, out):
    values = np.asarray(values)
    denom = np.asarray(denom)
    for s, lo, hi in _start_groups(starts):
        block, lmax = _dense_block(coeffs, lengths, offsets, lo, hi)
        out[lo:hi] = _stats(block, denom[lo:hi], values[None, s : s + lmax])[0]
