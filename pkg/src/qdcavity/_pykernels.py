"""Pure numpy fallback for the compiled kernels, same signatures and semantics."""

import numpy as np


def _view(psi, n, targets):
    # axes of the reshaped tensor follow atom order (atom 0 first)
    return psi.reshape((2,) * n), list(targets)


def apply_1q(psi, u, n, target):
    t = psi.reshape((2,) * n)
    moved = np.moveaxis(t, target, 0)
    res = np.tensordot(u, moved, axes=([1], [0]))
    t[...] = np.moveaxis(res, 0, target)


def apply_2q(psi, u, n, t0, t1):
    t = psi.reshape((2,) * n)
    moved = np.moveaxis(t, (t0, t1), (0, 1))
    res = np.tensordot(u.reshape(2, 2, 2, 2), moved, axes=([2, 3], [0, 1]))
    t[...] = np.moveaxis(res, (0, 1), (t0, t1))


def marginal_probs(psi, n, targets):
    t, targets = _view(psi, n, targets)
    p = np.abs(t) ** 2
    rest = tuple(a for a in range(n) if a not in targets)
    p = p.sum(axis=rest) if rest else p
    # remaining axes are in ascending atom order; reorder to the requested order
    order = sorted(targets)
    p = np.transpose(p, [order.index(a) for a in targets])
    return np.ascontiguousarray(p).reshape(-1).astype(np.float64)


def collapse(psi, n, targets, outcome):
    k = len(targets)
    idx = np.arange(psi.shape[0])
    key = np.zeros_like(idx)
    for a in targets:
        key = (key << 1) | ((idx >> (n - 1 - a)) & 1)
    mask = key == outcome
    psi[~mask] = 0
    weight = float(np.sum(np.abs(psi[mask]) ** 2))
    if weight > 0.0:
        psi /= np.sqrt(weight)
    return weight
