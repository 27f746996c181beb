"""Exact dense references: Fock-space Majorana algebra and qubit state vectors.

Nothing here touches the covariance-matrix code paths. Sizes are capped: at
most 4 fermionic modes and at most 9 qubits (``d <= 3``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lattice import CodePatch

MAX_MODES = 4
MAX_QUBITS = 9

# ---------------------------------------------------------------------------
# fermionic Fock space


def majorana_operators(n_modes: int) -> list[np.ndarray]:
    """Jordan-Wigner Majoranas ``c_{2k} = a_k + a_k^+``, ``c_{2k+1} = i(a_k^+ - a_k)``."""
    if not 1 <= n_modes <= MAX_MODES:
        raise ValueError(f"dense fermion oracle supports 1..{MAX_MODES} modes, got {n_modes}")
    z = np.diag([1.0, -1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)
    lower = np.array([[0, 1], [0, 0]], dtype=complex)  # a|1> = |0>

    def kron_all(ops):
        out = np.eye(1, dtype=complex)
        for o in ops:
            out = np.kron(out, o)
        return out

    cs = []
    for k in range(n_modes):
        a = kron_all([z] * k + [lower] + [eye] * (n_modes - k - 1))
        ad = a.conj().T
        cs.append(a + ad)
        cs.append(1j * (ad - a))
    return cs


def pair_operator(cs, p: int, q: int) -> np.ndarray:
    return 1j * cs[p] @ cs[q]


def gaussian_state(cs, pairs) -> np.ndarray:
    """The unique state with ``i c_p c_q = +1`` for a complete pairing."""
    if 2 * len(pairs) != len(cs):
        raise ValueError("need a complete pairing to fix a pure state")
    dim = cs[0].shape[0]
    proj = np.eye(dim, dtype=complex)
    for p, q in pairs:
        proj = proj @ (np.eye(dim) + pair_operator(cs, p, q)) / 2
    # any column with nonzero weight spans the one-dimensional image
    col = int(np.argmax(np.linalg.norm(proj, axis=0)))
    psi = proj[:, col]
    return psi / np.linalg.norm(psi)


def covariance(cs, psi: np.ndarray) -> np.ndarray:
    n = len(cs)
    m = np.zeros((n, n))
    for j in range(n):
        for k in range(n):
            if j != k:
                m[j, k] = np.real(psi.conj() @ (1j * cs[j] @ cs[k] @ psi))
    return m


def rotate_dense(cs, psi, theta: float, p: int, q: int) -> np.ndarray:
    """``exp(theta c_p c_q) psi``; ``(c_p c_q)^2 = -1`` gives the closed form."""
    return np.cos(theta) * psi + np.sin(theta) * (cs[p] @ cs[q] @ psi)


def project_dense(cs, psi, p: int, q: int) -> tuple[np.ndarray, float]:
    """Normalized ``(1 + i c_p c_q)/2 psi`` and its probability."""
    out = 0.5 * (psi + pair_operator(cs, p, q) @ psi)
    prob = float(np.real(out.conj() @ out))
    if prob == 0.0:
        return out, 0.0
    return out / np.sqrt(prob), prob


def expectation_chain(cs, psi, indices) -> complex:
    """``i^p <c_{j1} ... c_{j2p}>``."""
    op = np.eye(cs[0].shape[0], dtype=complex)
    for j in indices:
        op = op @ cs[j]
    return (1j) ** (len(indices) // 2) * (psi.conj() @ op @ psi)


def dense_fermion_check(ops, pairs, n_modes: int) -> tuple[np.ndarray, list[float]]:
    """Run ``("rot", theta, p, q)`` / ``("meas", p, q)`` steps densely.

    Starts from the pair-stabilized state and returns the final covariance
    matrix plus the probability of each measurement step.
    """
    cs = majorana_operators(n_modes)
    psi = gaussian_state(cs, pairs)
    probs = []
    for op in ops:
        if op[0] == "rot":
            _, theta, p, q = op
            psi = rotate_dense(cs, psi, theta, p, q)
        elif op[0] == "meas":
            _, p, q = op
            psi, prob = project_dense(cs, psi, p, q)
            probs.append(prob)
        else:
            raise ValueError(f"unknown op {op[0]!r}")
    return covariance(cs, psi), probs


def pfaffian_bruteforce(a: np.ndarray) -> float:
    """Pfaffian by expansion along the first row (exponential; n <= 12)."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if n > 12:
        raise ValueError("cofactor expansion is limited to 12x12")
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    for j in range(1, n):
        if a[0, j] == 0.0:
            continue
        keep = [k for k in range(1, n) if k != j]
        total += (-1) ** (j + 1) * a[0, j] * pfaffian_bruteforce(a[np.ix_(keep, keep)])
    return total


# ---------------------------------------------------------------------------
# qubit state vectors for small surface-code patches


@dataclass
class DenseState:
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


class QubitOracle:
    """State-vector simulator for a ``d <= 3`` patch; qubit ``q`` is bit ``q``."""

    def __init__(self, patch: CodePatch):
        if patch.n > MAX_QUBITS:
            raise ValueError(f"state-vector oracle supports at most {MAX_QUBITS} qubits (d <= 3)")
        self.patch = patch
        n = patch.n
        self.dim = 1 << n
        idx = np.arange(self.dim)
        self.bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
        self.zvals = 1 - 2 * self.bits  # Z eigenvalue per basis state and qubit

    def _mask(self, support) -> int:
        return sum(1 << q for q in support)

    def apply_x(self, psi, support):
        return psi[np.arange(self.dim) ^ self._mask(support)]

    def z_phase(self, support) -> np.ndarray:
        if not support:
            return np.ones(self.dim)
        return np.prod(self.zvals[:, list(support)], axis=1)

    def apply_z(self, psi, support):
        return psi * self.z_phase(support)

    def apply_rotation(self, psi, angles) -> np.ndarray:
        """``prod_j exp(i theta_j Z_j)``."""
        return psi * np.exp(1j * (self.zvals @ np.asarray(angles, dtype=float)))

    def project_x_faces(self, psi, s) -> np.ndarray:
        for supp, sf in zip(self.patch.x_faces, s):
            psi = 0.5 * (psi + sf * self.apply_x(psi, supp))
        return psi

    def product_state(self, bit: int) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[(self.dim - 1) if bit else 0] = 1.0
        return psi

    def encode_logical(self, logical_state: str = "0") -> DenseState:
        """Logical basis/superposition state via ``N_d prod (1 + A_f)/2``."""
        zero = self.patch.normalization * self.project_x_faces(self.product_state(0), [1] * len(self.patch.x_faces))
        one = self.patch.normalization * self.project_x_faces(self.product_state(1), [1] * len(self.patch.x_faces))
        table = {
            "0": zero,
            "1": one,
            "+": (zero + one) / np.sqrt(2),
            "-": (zero - one) / np.sqrt(2),
            "Y": (zero + 1j * one) / np.sqrt(2),
        }
        if logical_state not in table:
            raise ValueError(f"unknown logical state {logical_state!r}")
        return DenseState(table[logical_state])

    def stabilizer_expectations(self, psi) -> np.ndarray:
        out = [np.real(psi.conj() @ self.apply_x(psi, s)) for s in self.patch.x_faces]
        out += [np.real(psi.conj() @ self.apply_z(psi, s)) for s in self.patch.z_faces]
        return np.array(out)

    def logical_angle(self, phi, logical_state: str = "+") -> float:
        """Angle ``theta`` with ``phi = exp(i theta Z_L) psi_L`` up to a global phase."""
        ref = self.encode_logical(logical_state).amplitudes
        phi = phi / np.linalg.norm(phi)
        zref = self.apply_z(ref, self.patch.z_logical_support)
        a = ref.conj() @ phi
        b = zref.conj() @ phi
        resid = np.linalg.norm(phi - a * ref - b * zref)
        if resid > 1e-9:
            raise RuntimeError(f"state is not a logical Z-rotation of |{logical_state}_L> (residual {resid:.2e})")
        return 0.5 * float(np.arctan2(2 * np.imag(b * np.conj(a)), abs(a) ** 2 - abs(b) ** 2))

    def x_basis_probabilities(self, psi) -> np.ndarray:
        """``P(m)`` for measuring every qubit in the X basis; index bit ``q`` set iff ``m_q = -1``."""
        amp = psi.reshape((2,) * self.patch.n)  # axis k <-> qubit n-1-k
        h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        for ax in range(self.patch.n):
            amp = np.moveaxis(np.tensordot(h, amp, axes=([1], [ax])), 0, ax)
        return np.abs(amp.reshape(-1)) ** 2


def enumerate_syndromes(patch: CodePatch, angles, rounds: int, decode2d, logical_state: str = "+", tol: float = 1e-14):
    """Exact table of ``(s_rounds, P, theta_star)`` by exhaustive branching.

    ``angles`` are the per-qubit rotation angles applied before every round.
    ``decode2d(s)`` returns the Z-support of the final-round correction.
    """
    if rounds > 3:
        raise ValueError("exhaustive enumeration supports at most 3 rounds")
    orc = QubitOracle(patch)
    psi0 = orc.encode_logical(logical_state).amplitudes
    nx = len(patch.x_faces)
    all_s = [np.array(s) for s in itertools.product((1, -1), repeat=nx)]
    table = []

    def recurse(psi, history):
        if len(history) == rounds:
            prob = float(np.real(psi.conj() @ psi))
            phi = orc.apply_z(psi, decode2d(history[-1]))
            table.append((tuple(tuple(int(x) for x in s) for s in history), prob, orc.logical_angle(phi, logical_state)))
            return
        psi = orc.apply_rotation(psi, angles)
        for s in all_s:
            branch = orc.project_x_faces(psi, s)
            if np.real(branch.conj() @ branch) > tol:
                recurse(branch, history + [s])

    recurse(psi0, [])
    return table
