"""Vectorized numpy implementation of the hot kernels.

Same signatures and results as the compiled ``_kernels`` extension; used when
the extension is not built or when ``NOCLICK_PURE_PYTHON`` is set.

Symmetry group elements are ``T^r P^p Z^z`` (translation by ``r`` sites,
reflection ``i -> L-1-i``, global spin flip).  Their character in a sector
``(k, refl, z2)`` is ``exp(2j*pi*k*r/L) * refl**p * z2**z``; ``refl == 0`` or
``z2 == 0`` means the symmetry is not resolved.
"""

import numpy as np

__all__ = [
    "representatives",
    "enumerate_reps",
    "offdiag_flips",
    "dsff_signal",
]


def _reverse_bits(states, L):
    out = np.zeros_like(states)
    for i in range(L):
        out |= ((states >> i) & 1) << (L - 1 - i)
    return out


def _group_images(states, L, translate, refl, z2):
    """Yield ``(r, p, z, image)`` for every element of the symmetry group."""
    mask = np.int64((1 << L) - 1)
    bases = [(0, states)]
    if refl:
        bases.append((1, _reverse_bits(states, L)))
    shifts = range(L) if translate else range(1)
    for p, base in bases:
        for z in ((0, 1) if z2 else (0,)):
            b = base ^ mask if z else base
            for r in shifts:
                if r == 0:
                    yield r, p, z, b
                else:
                    yield r, p, z, ((b << r) | (b >> (L - r))) & mask


def _character(r, p, z, L, k, refl, z2):
    chi = np.exp(2j * np.pi * k * r / L)
    if p:
        chi *= refl
    if z:
        chi *= z2
    return chi


def representatives(states, L, k, translate, refl, z2):
    """Map each state to its orbit representative.

    Returns ``(reps, phases)`` where ``phase`` is the character of the group
    element carrying the representative onto the input state.
    """
    states = np.asarray(states, dtype=np.int64)
    reps = states.copy()
    phases = np.ones(states.shape, dtype=np.complex128)
    for r, p, z, img in _group_images(states, L, translate, refl, z2):
        better = img < reps
        if np.any(better):
            reps[better] = img[better]
            phases[better] = np.conj(_character(r, p, z, L, k, refl, z2))
    return reps, phases


def enumerate_reps(L, k, translate, refl, z2):
    """Representatives with nonzero projection in a sector, ascending.

    Returns ``(reps, norms)`` with ``norms[a]**2 = <r_a|P|r_a>``, the squared
    norm of the projected representative.
    """
    states = np.arange(1 << L, dtype=np.int64)
    is_rep = np.ones(states.shape, dtype=bool)
    stab = np.zeros(states.shape, dtype=np.complex128)
    order = 0
    for r, p, z, img in _group_images(states, L, translate, refl, z2):
        order += 1
        is_rep &= img >= states
        stab[img == states] += _character(r, p, z, L, k, refl, z2)
    n = stab.real
    keep = is_rep & (n > 0.5)
    return states[keep], np.sqrt(n[keep] / order)


def offdiag_flips(L, reps, norms, k, translate, refl, z2, cx):
    """COO triplets of ``sum_i cx[i] X_i`` in a symmetry-adapted basis."""
    reps = np.asarray(reps, dtype=np.int64)
    cx = np.asarray(cx, dtype=np.complex128)
    dim = reps.size
    sites = np.arange(L, dtype=np.int64)
    flipped = (reps[:, None] ^ (np.int64(1) << sites)[None, :]).ravel()
    cols = np.repeat(np.arange(dim, dtype=np.int64), L)
    coef = np.tile(cx, dim)
    new_reps, phases = representatives(flipped, L, k, translate, refl, z2)
    rows = np.searchsorted(reps, new_reps)
    rows_c = np.minimum(rows, dim - 1)
    found = (rows < dim) & (reps[rows_c] == new_reps)
    rows = rows_c[found]
    cols = cols[found]
    vals = coef[found] * phases[found] * norms[rows] / norms[cols]
    return rows, cols, vals


def dsff_signal(re, im, taus, thetas):
    """``S[t, j] = sum_n exp(i |tau_j| (Re z_n cos theta_t + Im z_n sin theta_t))``."""
    re = np.asarray(re, dtype=np.float64)
    im = np.asarray(im, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    out = np.empty((len(thetas), taus.size), dtype=np.complex128)
    for t, theta in enumerate(thetas):
        proj = re * np.cos(theta) + im * np.sin(theta)
        out[t] = np.exp(1j * np.multiply.outer(taus, proj)).sum(axis=1)
    return out
