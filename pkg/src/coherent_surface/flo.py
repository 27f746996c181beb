"""Gaussian-state (fermionic linear optics) primitives on covariance matrices.

The covariance matrix of a state is ``M[j, k] = <i c_j c_k>`` for ``j != k`` and
zero on the diagonal. It is real and antisymmetric, and orthogonal exactly when
the state is a pure Gaussian state.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)

EPS_MEAS = 1e-12
PURITY_TOL = 1e-6
HYGIENE_INTERVAL = 1000


class ZeroProbabilityError(ValueError):
    """Projection onto a measurement outcome of (numerically) zero probability."""


def init_pair_stabilized(pairs, n_modes: int) -> np.ndarray:
    """Covariance matrix of the state stabilized by ``i c_p c_q`` for each pair."""
    dim = 2 * n_modes
    m = np.zeros((dim, dim))
    seen: set[int] = set()
    for p, q in pairs:
        if p == q or p in seen or q in seen:
            raise ValueError(f"pairs overlap or repeat an index at ({p}, {q})")
        if not (0 <= p < dim and 0 <= q < dim):
            raise ValueError(f"pair ({p}, {q}) out of range for {n_modes} modes")
        seen.update((p, q))
        m[p, q] = 1.0
        m[q, p] = -1.0
    return m


def purity_error(m: np.ndarray) -> float:
    """``max |M M^T - I|``; zero for a pure Gaussian state."""
    return float(np.max(np.abs(m @ m.T - np.eye(len(m)))))


def is_pure(m: np.ndarray, tol: float = PURITY_TOL) -> bool:
    return purity_error(m) <= tol


def apply_rotation(m: np.ndarray, theta: float, p: int, q: int, *, inplace: bool = False) -> np.ndarray:
    """Covariance matrix of ``exp(theta c_p c_q) |psi>``.

    In the Heisenberg picture ``c_p -> cos(2 theta) c_p + sin(2 theta) c_q`` and
    ``c_q -> cos(2 theta) c_q - sin(2 theta) c_p``, i.e. ``M -> R M R^T``.
    """
    if p == q:
        raise ValueError("rotation needs two distinct Majoranas")
    out = m if inplace else m.copy()
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    rp, rq = out[p].copy(), out[q].copy()
    out[p] = c * rp + s * rq
    out[q] = c * rq - s * rp
    cp, cq = out[:, p].copy(), out[:, q].copy()
    out[:, p] = c * cp + s * cq
    out[:, q] = c * cq - s * cp
    return out


def pair_probability(m: np.ndarray, p: int, q: int) -> float:
    """Probability of the ``+1`` outcome of ``i c_p c_q``."""
    return 0.5 * (1.0 + m[p, q])


def measure_pair(m: np.ndarray, p: int, q: int) -> tuple[np.ndarray, float]:
    """Project onto ``i c_p c_q = +1``. Swap ``p, q`` for the ``-1`` outcome.

    Returns the post-measurement covariance matrix and the outcome probability.
    """
    if p == q:
        raise ValueError("measurement needs two distinct Majoranas")
    prob = pair_probability(m, p, q)
    if prob < EPS_MEAS:
        raise ZeroProbabilityError(f"outcome +1 of i c_{p} c_{q} has probability {prob:.3e}")
    k = m[p].copy()
    l = m[q].copy()
    out = m + (np.outer(l, k) - np.outer(k, l)) / (2.0 * prob)
    out[p, :] = 0.0
    out[q, :] = 0.0
    out[:, p] = 0.0
    out[:, q] = 0.0
    out[p, q] = 1.0
    out[q, p] = -1.0
    return out, prob


def sanitize(m: np.ndarray) -> np.ndarray:
    """Re-antisymmetrize; re-orthogonalize via the polar factor if purity drifted."""
    m = 0.5 * (m - m.T)
    err = purity_error(m)
    if err > PURITY_TOL:
        logger.warning("covariance matrix drifted from orthogonality by %.2e; re-orthogonalizing", err)
        u, _, vt = np.linalg.svd(m)
        m = u @ vt
        m = 0.5 * (m - m.T)
    return m


class CovarianceMatrix:
    """A mutable pure Gaussian state with periodic numerical hygiene."""

    def __init__(self, m: np.ndarray):
        self.m = np.array(m, dtype=float)
        self._ops = 0

    @classmethod
    def from_pairs(cls, pairs, n_modes: int) -> "CovarianceMatrix":
        return cls(init_pair_stabilized(pairs, n_modes))

    @property
    def n_modes(self) -> int:
        return len(self.m) // 2

    def _tick(self):
        self._ops += 1
        if self._ops % HYGIENE_INTERVAL == 0:
            self.m = sanitize(self.m)

    def entry(self, p: int, q: int) -> float:
        return float(self.m[p, q])

    def rotate(self, theta: float, p: int, q: int) -> None:
        apply_rotation(self.m, theta, p, q, inplace=True)
        self._tick()

    def measure(self, p: int, q: int) -> float:
        self.m, prob = measure_pair(self.m, p, q)
        self._tick()
        return prob

    def conditional_probability(self, first: tuple[int, int], second: tuple[int, int]) -> float:
        """Probability of ``second = +1`` after projecting ``first`` onto ``+1``."""
        p, q = first
        r, t = second
        prob = pair_probability(self.m, p, q)
        if prob < EPS_MEAS:
            return 0.0
        k, l = self.m[p], self.m[q]
        upd = self.m[r, t] + (l[r] * k[t] - k[r] * l[t]) / (2.0 * prob)
        return 0.5 * (1.0 + upd)


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix by Parlett-Reid reduction with pivoting."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("pfaffian needs a square matrix")
    if n % 2:
        return 0.0
    result = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1 :, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            result = -result
        if a[k + 1, k] == 0.0:
            return 0.0
        result *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2 :] / a[k, k + 1]
            # eliminate row/col k and k+1 couplings into the trailing block
            a[k + 2 :, k + 2 :] += np.outer(tau, a[k + 2 :, k + 1]) - np.outer(a[k + 2 :, k + 1], tau)
    return float(result)


def pfaffian_expectation(m: np.ndarray, indices) -> float:
    """``i^p <c_{j1} ... c_{j2p}>`` for a pure Gaussian state, by Wick's theorem."""
    idx = list(indices)
    if len(idx) % 2:
        raise ValueError("need an even number of Majorana indices")
    if len(set(idx)) != len(idx):
        raise ValueError("Majorana indices must be distinct")
    if not idx:
        return 1.0
    return pfaffian(m[np.ix_(idx, idx)])
