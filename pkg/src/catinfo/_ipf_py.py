"""Pure numpy fallback for the IPF loop; same contract as ``_ipf_kernel``."""

import numpy as np


def _max_discrepancy(fitted, idx, target, offsets):
    dev = 0.0
    for g in range(idx.shape[0]):
        lo, hi = offsets[g], offsets[g + 1]
        margin = np.bincount(idx[g], weights=fitted, minlength=hi - lo)
        dev = max(dev, float(np.abs(margin - target[lo:hi]).max()))
    return dev


def ipf_loop(fitted, idx, target, offsets, tol, max_iter):
    """Run cyclic proportional scaling in place on ``fitted``.

    Returns ``(cycles, converged, max_abs_margin_discrepancy)``.
    """
    it = 0
    dev = _max_discrepancy(fitted, idx, target, offsets)
    converged = dev < tol
    while not converged and it < max_iter:
        it += 1
        for g in range(idx.shape[0]):
            lo, hi = offsets[g], offsets[g + 1]
            margin = np.bincount(idx[g], weights=fitted, minlength=hi - lo)
            ratio = np.zeros_like(margin)
            np.divide(target[lo:hi], margin, out=ratio, where=margin > 0)
            fitted *= ratio[idx[g]]
        dev = _max_discrepancy(fitted, idx, target, offsets)
        converged = dev < tol
    return it, bool(converged), dev
