"""NumPy implementations of the element-local assembly kernels.

Same signatures as the compiled extension `smrom._kernels`; all inputs are
contiguous float64 arrays.  Every function returns the per-element local
blocks; scattering into sparse matrices happens in `assemble`.
"""

import numpy as np

BACKEND = "numpy"


def mass_p2_local(p2_vals, detw):
    """(nel, 6, 6) scalar P2 mass blocks."""
    return np.einsum("eq,qi,qj->eij", detw, p2_vals, p2_vals)


def stiffness_p2_local(p2_grads, detw):
    """(nel, 6, 6) scalar P2 stiffness blocks."""
    return np.einsum("eq,eqia,eqja->eij", detw, p2_grads, p2_grads)


def graddiv_local(p2_grads, detw):
    """(nel, 12, 12) vector grad-div blocks, interleaved components."""
    nel = p2_grads.shape[0]
    out = np.empty((nel, 12, 12))
    blocks = np.einsum("eq,eqia,eqjb->eiajb", detw, p2_grads, p2_grads)
    out[:, 0::2, 0::2] = blocks[:, :, 0, :, 0]
    out[:, 0::2, 1::2] = blocks[:, :, 0, :, 1]
    out[:, 1::2, 0::2] = blocks[:, :, 1, :, 0]
    out[:, 1::2, 1::2] = blocks[:, :, 1, :, 1]
    return out


def divergence_local(p1_vals, p2_grads, detw):
    """(nel, 3, 12) blocks of (div v, q), interleaved velocity columns."""
    nel = p2_grads.shape[0]
    out = np.empty((nel, 3, 12))
    blocks = np.einsum("eq,qi,eqjc->eijc", detw, p1_vals, p2_grads)
    out[:, :, 0::2] = blocks[:, :, :, 0]
    out[:, :, 1::2] = blocks[:, :, :, 1]
    return out


def convection_local(wq, p2_vals, p2_grads, detw):
    """(nel, 6, 6) scalar skew convection blocks for advecting field wq.

    n[i, j] = 1/2 sum_q detw * [(w . grad N_j) N_i - (w . grad N_i) N_j];
    the vector operator acts componentwise with this block on the diagonal.
    """
    wg = np.einsum("eqc,eqjc->eqj", wq, p2_grads)  # (w . grad N_j)
    t = np.einsum("eq,qi,eqj->eij", detw, p2_vals, wg)
    return 0.5 * (t - np.transpose(t, (0, 2, 1)))


def p1_stiffness_local(p1_grads, areas, coef):
    """(nel, 3, 3) P1 stiffness blocks weighted by a per-element factor."""
    scale = coef * areas
    return np.einsum("e,eia,eja->eij", scale, p1_grads, p1_grads)
