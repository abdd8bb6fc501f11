"""Pure numpy truncated-product kernels (fallback for the compiled ``_jetcore``).

Both backends share one calling convention. Coefficient arrays are C-contiguous
float64 with the Taylor coefficients on the last axis; ``pi, pj, pk`` list every
pair of multi-indices whose degrees sum to at most the target order, sorted by
``pk``, and ``starts`` marks where each ``pk`` run begins.
"""

import numpy as np


def mul(a, b, pi, pj, pk, starts, ncoef):
    """Elementwise truncated product of two ``(n, *)`` coefficient arrays."""
    prod = a[:, pi] * b[:, pj]
    return np.add.reduceat(prod, starts, axis=-1)


def bmm(a, b, pi, pj, pk, starts, ncoef):
    """Batched jet matrix product ``(nb, L, K, *) x (nb, K, R, *) -> (nb, L, R, ncoef)``."""
    prod = np.einsum("blkp,bkrp->blrp", a[..., pi], b[..., pj], optimize=True)
    return np.add.reduceat(prod, starts, axis=-1)
