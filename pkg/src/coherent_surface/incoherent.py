"""Incoherent baseline: independent Z flips plus readout errors, decoded by 3D MWPM.

Each of the ``d`` rounds applies ``Z`` to every qubit independently with
probability ``p`` and then reads the X-faces. Outcomes of rounds ``1..d-1``
are flipped with probability ``q``; the last round is read perfectly. A shot
fails when the accumulated error times the correction is a logical Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .decoder import (
    build_detection_graph,
    detection_events,
    mwpm_decode_batch,
    mwpm_decode_reference,
)
from .lattice import CodePatch, build_patch


@dataclass(frozen=True)
class FailureEstimate:
    d: int
    p: float
    q: float
    shots: int
    failures: int

    @property
    def p_fail(self) -> float:
        return self.failures / self.shots

    @property
    def stderr(self) -> float:
        pf = self.p_fail
        return math.sqrt(max(pf * (1 - pf), 0.0) / self.shots)


def sample_errors(patch: CodePatch, p: float, q: float, shots: int, rng):
    """Draw error histories; returns ``(final Z error, noisy syndromes)``.

    Syndromes are ``±1`` int8 with shape ``(shots, d, n_xfaces)``.
    """
    d = patch.d
    flips = rng.random((shots, d, patch.n)) < p
    cum = np.bitwise_xor.accumulate(flips, axis=1).astype(np.uint8)
    bits = (cum @ patch.x_check_matrix.T) % 2  # (shots, d, n_x)
    if d > 1 and q > 0:
        ro = rng.random((shots, d - 1, bits.shape[-1])) < q
        bits[:, :-1, :] ^= ro.astype(bits.dtype)
    s = (1 - 2 * bits.astype(np.int8)).astype(np.int8)
    return cum[:, -1, :], s


def logical_failures(patch: CodePatch, final_error: np.ndarray, corrections: np.ndarray) -> np.ndarray:
    """Boolean per shot: residual Z-string is a nontrivial logical."""
    residual = (final_error ^ corrections).astype(np.uint8)
    if np.any((residual @ patch.x_check_matrix.T) % 2):
        raise RuntimeError("correction does not clear the final-round syndrome")
    return (residual[:, list(patch.x_logical_support)].sum(axis=1) % 2).astype(bool)


def estimate_failure(d: int, p: float, q: float, shots: int, rng, chunk: int = 20000) -> FailureEstimate:
    """Monte Carlo failure rate, decoded in batches with PyMatching."""
    patch = build_patch(d)
    graph = build_detection_graph(patch, d, p, q)
    fails = 0
    done = 0
    while done < shots:
        k = min(chunk, shots - done)
        err, s = sample_errors(patch, p, q, k, rng)
        corr = mwpm_decode_batch(graph, detection_events(s))
        fails += int(logical_failures(patch, err, corr).sum())
        done += k
    return FailureEstimate(d, p, q, shots, fails)


def simulate_incoherent_shot(patch: CodePatch, p: float, q: float, rng, graph=None) -> bool:
    """One shot through the reference decoder, written plainly; True on failure."""
    d = patch.d
    graph = graph or build_detection_graph(patch, d, p, q)
    error = np.zeros(patch.n, dtype=np.uint8)
    rounds = []
    for t in range(d):
        error ^= (rng.random(patch.n) < p).astype(np.uint8)
        s = patch.x_syndrome(np.flatnonzero(error))
        if t < d - 1:
            s = np.where(rng.random(len(s)) < q, -s, s).astype(np.int8)
        rounds.append(s)
    corr = mwpm_decode_reference(graph, detection_events(np.array(rounds)))
    residual = error.copy()
    residual[list(corr.z_support)] ^= 1
    if np.any(patch.x_syndrome(np.flatnonzero(residual)) != 1):
        raise RuntimeError("correction does not clear the final-round syndrome")
    return bool(residual[list(patch.x_logical_support)].sum() % 2)
