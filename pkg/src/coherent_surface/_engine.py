"""Numba kernels: Gaussian-state passes over the active part of the covariance matrix.

Majoranas that sit in a decoupled stabilized pair (``M[p, q] = ±1``, zero
elsewhere) are stored as ``partner``/``psign`` entries instead of matrix rows.
Only the coupled remainder lives in the dense block ``A``; measurements move
rows back out of it. The operations are the same as in :mod:`flo`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EPS_MEAS = 1e-12
_DECOUPLE_TOL = 1e-13


@njit(cache=True)
def _new_state(n_maj, init_p, init_q):
    partner = -np.ones(n_maj, dtype=np.int64)
    psign = np.zeros(n_maj)
    for k in range(init_p.shape[0]):
        p, q = init_p[k], init_q[k]
        partner[p] = q
        partner[q] = p
        psign[p] = 1.0
        psign[q] = -1.0
    pos = -np.ones(n_maj, dtype=np.int64)
    act = np.zeros(n_maj, dtype=np.int64)
    a = np.zeros((n_maj, n_maj))
    meta = np.zeros(2, dtype=np.int64)  # [active size, peak active size]
    return partner, psign, pos, act, a, meta


@njit(cache=True)
def _activate(i, partner, psign, pos, act, a, meta):
    if pos[i] >= 0:
        return
    na = meta[0]
    j = partner[i]
    width = na + 2
    for k in range(width):
        a[na, k] = 0.0
        a[k, na] = 0.0
        a[na + 1, k] = 0.0
        a[k, na + 1] = 0.0
    pos[i] = na
    act[na] = i
    if j >= 0:
        pos[j] = na + 1
        act[na + 1] = j
        a[na, na + 1] = psign[i]
        a[na + 1, na] = -psign[i]
        partner[i] = -1
        partner[j] = -1
        meta[0] = na + 2
    else:
        meta[0] = na + 1
    if meta[0] > meta[1]:
        meta[1] = meta[0]


@njit(cache=True)
def _remove(i, pos, act, a, meta):
    na = meta[0]
    k = pos[i]
    last = na - 1
    if k != last:
        mv = act[last]
        for r in range(na):
            a[k, r] = a[last, r]
        for r in range(na):
            a[r, k] = a[r, last]
        a[k, k] = 0.0
        act[k] = mv
        pos[mv] = k
    pos[i] = -1
    meta[0] = na - 1


@njit(cache=True)
def _entry(i, j, partner, psign, pos, a):
    pi, pj = pos[i], pos[j]
    if pi >= 0 and pj >= 0:
        return a[pi, pj]
    if partner[i] == j:
        return psign[i]
    return 0.0


@njit(cache=True)
def _rotate(theta, p, q, partner, psign, pos, act, a, meta):
    if partner[p] == q:
        return  # exp(theta c_p c_q) commutes with i c_p c_q
    _activate(p, partner, psign, pos, act, a, meta)
    _activate(q, partner, psign, pos, act, a, meta)
    na = meta[0]
    x, y = pos[p], pos[q]
    c, s = np.cos(2.0 * theta), np.sin(2.0 * theta)
    for k in range(na):
        u, v = a[x, k], a[y, k]
        a[x, k] = c * u + s * v
        a[y, k] = c * v - s * u
    for k in range(na):
        u, v = a[k, x], a[k, y]
        a[k, x] = c * u + s * v
        a[k, y] = c * v - s * u


@njit(cache=True)
def _decouple_rows(partner, psign, pos, act, a, meta):
    """Move rows that became pure pairs out of the active block."""
    r = 0
    while r < meta[0]:
        na = meta[0]
        best = -1
        count = 0
        for k in range(na):
            if abs(a[r, k]) > _DECOUPLE_TOL:
                count += 1
                best = k
                if count > 1:
                    break
        if count == 1 and abs(a[r, best]) > 0.5:
            i, j = act[r], act[best]
            sgn = 1.0 if a[r, best] > 0 else -1.0
            _remove(i, pos, act, a, meta)
            _remove(j, pos, act, a, meta)
            partner[i] = j
            partner[j] = i
            psign[i] = sgn
            psign[j] = -sgn
            r = 0
        else:
            r += 1


@njit(cache=True)
def _measure(p, q, prob, partner, psign, pos, act, a, meta):
    """Project onto ``i c_p c_q = +1`` (probability ``prob`` already computed)."""
    if partner[p] == q:
        return
    _activate(p, partner, psign, pos, act, a, meta)
    _activate(q, partner, psign, pos, act, a, meta)
    na = meta[0]
    x, y = pos[p], pos[q]
    kv = a[x, :na].copy()
    lv = a[y, :na].copy()
    f = 1.0 / (2.0 * prob)
    for j in range(na):
        lj, kj = lv[j], kv[j]
        if lj == 0.0 and kj == 0.0:
            continue
        for k in range(na):
            a[j, k] += f * (lj * kv[k] - kj * lv[k])
    _remove(p, pos, act, a, meta)
    _remove(q, pos, act, a, meta)
    partner[p] = q
    partner[q] = p
    psign[p] = 1.0
    psign[q] = -1.0
    _decouple_rows(partner, psign, pos, act, a, meta)


@njit(cache=True)
def _branch_weights(xp, xq, yp, yq, partner, psign, pos, a):
    """Joint probabilities of ``(X, SX) = (m, m)`` for ``m = +1`` and ``m = -1``."""
    mxx = _entry(xp, xq, partner, psign, pos, a)
    myy = _entry(yp, yq, partner, psign, pos, a)
    k_yp = _entry(xp, yp, partner, psign, pos, a)
    k_yq = _entry(xp, yq, partner, psign, pos, a)
    l_yp = _entry(xq, yp, partner, psign, pos, a)
    l_yq = _entry(xq, yq, partner, psign, pos, a)
    px_plus = 0.5 * (1.0 + mxx)
    px_minus = 0.5 * (1.0 - mxx)
    w_plus = 0.0
    ps_plus = 0.0
    if px_plus >= EPS_MEAS:
        ps_plus = 0.5 * (1.0 + myy + (l_yp * k_yq - k_yp * l_yq) / (2.0 * px_plus))
        w_plus = px_plus * ps_plus
    w_minus = 0.0
    ps_minus = 0.0
    if px_minus >= EPS_MEAS:
        # outcome -1: measure (xq, xp) then (yq, yp)
        ps_minus = 0.5 * (1.0 - myy + (k_yq * l_yp - l_yq * k_yp) / (2.0 * px_minus))
        w_minus = px_minus * ps_minus
    return px_plus, ps_plus, w_plus, px_minus, ps_minus, w_minus


@njit(cache=True)
def sample_pass(n_maj, init_p, init_q, zp, zq, xp, xq, yp, yq, angles, uniforms, m_out, ps_out):
    """Sample the X outcomes ``m`` qubit by qubit under ``prod exp(i theta_k Z_k)``.

    Writes ``m`` into ``m_out`` and the probability of the forced second
    projection per qubit into ``ps_out``; returns ``(log P(m), peak active size)``.
    """
    partner, psign, pos, act, a, meta = _new_state(n_maj, init_p, init_q)
    logp = 0.0
    for k in range(angles.shape[0]):
        _rotate(-angles[k], zp[k], zq[k], partner, psign, pos, act, a, meta)
        px_p, ps_p, w_p, px_m, ps_m, w_m = _branch_weights(xp[k], xq[k], yp[k], yq[k], partner, psign, pos, a)
        total = w_p + w_m
        p_plus = w_p / total
        if uniforms[k] < p_plus:
            m_out[k] = 1
            logp += np.log(p_plus)
            ps_out[k] = ps_p
            _measure(xp[k], xq[k], px_p, partner, psign, pos, act, a, meta)
            _measure(yp[k], yq[k], ps_p, partner, psign, pos, act, a, meta)
        else:
            m_out[k] = -1
            logp += np.log(1.0 - p_plus)
            ps_out[k] = ps_m
            _measure(xq[k], xp[k], px_m, partner, psign, pos, act, a, meta)
            _measure(yq[k], yp[k], ps_m, partner, psign, pos, act, a, meta)
    return logp, meta[1]


@njit(cache=True)
def forced_pass(n_maj, init_p, init_q, zp, zq, xp, xq, yp, yq, angles, m_forced):
    """Log of the unnormalized weight of the outcome string ``m_forced``.

    Returns ``-inf`` as soon as one factor falls below the measurement floor.
    """
    partner, psign, pos, act, a, meta = _new_state(n_maj, init_p, init_q)
    logw = 0.0
    for k in range(angles.shape[0]):
        _rotate(-angles[k], zp[k], zq[k], partner, psign, pos, act, a, meta)
        px_p, ps_p, w_p, px_m, ps_m, w_m = _branch_weights(xp[k], xq[k], yp[k], yq[k], partner, psign, pos, a)
        if m_forced[k] > 0:
            if px_p < EPS_MEAS or ps_p < EPS_MEAS:
                return -np.inf
            logw += np.log(px_p) + np.log(ps_p)
            _measure(xp[k], xq[k], px_p, partner, psign, pos, act, a, meta)
            _measure(yp[k], yq[k], ps_p, partner, psign, pos, act, a, meta)
        else:
            if px_m < EPS_MEAS or ps_m < EPS_MEAS:
                return -np.inf
            logw += np.log(px_m) + np.log(ps_m)
            _measure(xq[k], xp[k], px_m, partner, psign, pos, act, a, meta)
            _measure(yq[k], yp[k], ps_m, partner, psign, pos, act, a, meta)
    return logw
