"""Oracle comparisons behind ``coherent-surface validate``.

Each check returns a :class:`Check` row; the CLI prints them as a table.
Everything here runs in seconds at ``d <= 3``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import flo
from .decoder import (
    build_detection_graph,
    fold_angle,
    mwpm_decode,
    mwpm_decode_reference,
    mwpm_weight_bruteforce,
)
from .lattice import build_patch
from .oracle import QubitOracle, dense_fermion_check, enumerate_syndromes, pfaffian_bruteforce
from .sampler import get_sampler, syndrome_from_m


@dataclass
class Check:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tolerance)


def angle_gap(a, b) -> float:
    """Distance between angles modulo pi."""
    return float(abs(np.mod(np.asarray(a) - np.asarray(b) + np.pi / 2, np.pi) - np.pi / 2))


def random_fermion_ops(rng, n_modes: int, steps: int = 12):
    """A random rotation/measurement sequence that never hits a zero branch."""
    dim = 2 * n_modes
    perm = rng.permutation(dim)
    pairs = [(int(perm[2 * k]), int(perm[2 * k + 1])) for k in range(n_modes)]
    ops = []
    m = flo.init_pair_stabilized(pairs, n_modes)
    for _ in range(steps):
        p, q = (int(x) for x in rng.choice(dim, 2, replace=False))
        if rng.random() < 0.6:
            th = float(rng.uniform(-np.pi, np.pi))
            ops.append(("rot", th, p, q))
            m = flo.apply_rotation(m, th, p, q)
        elif flo.pair_probability(m, p, q) > 1e-3:
            ops.append(("meas", p, q))
            m, _ = flo.measure_pair(m, p, q)
    return pairs, ops


def check_flo(seed: int = 0, trials: int = 40) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for t in range(trials):
        n_modes = 3 if t % 2 else 4
        pairs, ops = random_fermion_ops(rng, n_modes)
        ref, ref_probs = dense_fermion_check(ops, pairs, n_modes)
        m = flo.init_pair_stabilized(pairs, n_modes)
        probs = []
        for op in ops:
            if op[0] == "rot":
                m = flo.apply_rotation(m, *op[1:])
            else:
                m, pr = flo.measure_pair(m, *op[1:])
                probs.append(pr)
        worst = max(worst, float(np.max(np.abs(m - ref))))
        if probs:
            worst = max(worst, float(np.max(np.abs(np.array(probs) - ref_probs))))
    return Check("FLO ops vs dense fermion oracle (<=4 modes)", worst, 1e-10)


def check_pfaffian(seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in (2, 4, 6, 8, 10):
        x = rng.normal(size=(n, n))
        a = x - x.T
        worst = max(worst, abs(flo.pfaffian(a) - pfaffian_bruteforce(a)))
    return Check("Pfaffian vs cofactor expansion", worst, 1e-12)


def exact_syndrome_table(sampler, angles) -> dict:
    """``P(s)`` by summing FLO weights of every outcome string ``m``."""
    n = sampler.patch.n
    weights: dict = {}
    for bits in itertools.product((1, -1), repeat=n):
        m = np.array(bits)
        lw = sampler.forced_log_weight(angles, m)
        s = tuple(int(x) for x in syndrome_from_m(m, sampler.patch))
        weights[s] = weights.get(s, 0.0) + (math.exp(lw) if np.isfinite(lw) else 0.0)
    total = sum(weights.values())
    return {s: w / total for s, w in weights.items()}


def check_sampler_distribution(theta: float = 0.3) -> Check:
    sampler = get_sampler(3)
    angles = np.full(9, theta)
    table = enumerate_syndromes(sampler.patch, angles, 1, sampler.decode2d)
    flo_table = exact_syndrome_table(sampler, angles)
    worst = max(abs(p - flo_table.get(s[0], 0.0)) for s, p, _ in table)
    return Check(f"P(s) from FLO vs state vector (d=3, theta={theta})", worst, 1e-10)


def check_logical_angles(theta: float = 0.3) -> Check:
    sampler = get_sampler(3)
    angles = np.full(9, theta)
    table = enumerate_syndromes(sampler.patch, angles, 1, sampler.decode2d)
    worst = max(
        angle_gap(th, sampler.logical_angle(angles, sampler.decode2d(np.array(s[0])))) for s, _, th in table
    )
    return Check(f"theta_L per syndrome (d=3, theta={theta})", worst, 1e-8)


def check_multiround(theta: float = 0.2, rounds: int = 3) -> Check:
    sampler = get_sampler(3)
    table = enumerate_syndromes(sampler.patch, np.full(9, theta), rounds, sampler.decode2d)
    worst = max(angle_gap(th, fold_angle(sampler.history_angles(theta, hist).sum())) for hist, _, th in table)
    return Check(f"theta* per branch (d=3, rounds={rounds}, theta={theta})", worst, 1e-8)


def check_single_qubit(theta: float = 0.37) -> Check:
    sampler = get_sampler(1)
    return Check("d=1 logical angle equals physical angle", angle_gap(sampler.logical_angle([theta]), theta), 1e-12)


def check_decoder(seed: int = 0, instances: int = 200) -> Check:
    rng = np.random.default_rng(seed)
    patch = build_patch(3)
    graph = build_detection_graph(patch, 3, 0.05, 0.05)
    worst = 0.0
    done = 0
    while done < instances:
        ev = rng.random((3, len(patch.x_faces))) < 0.1
        if not 0 < ev.sum() <= 8:
            continue
        w = mwpm_weight_bruteforce(graph, ev)
        worst = max(worst, abs(mwpm_decode(graph, ev).weight - w) / w, abs(mwpm_decode_reference(graph, ev).weight - w) / w)
        done += 1
    return Check("MWPM weight vs brute-force matching (d=3, p=q=0.05)", worst, 1e-9)


def check_encoding() -> Check:
    orc = QubitOracle(build_patch(3))
    zero = orc.encode_logical("0").amplitudes
    one = orc.encode_logical("1").amplitudes
    worst = max(
        float(np.max(np.abs(orc.stabilizer_expectations(zero) - 1))),
        abs(np.vdot(zero, one)),
        abs(np.linalg.norm(zero) - 1),
    )
    return Check("d=3 logical states: stabilizers +1, orthonormal", worst, 1e-12)


ALL_CHECKS = (
    check_flo,
    check_pfaffian,
    check_encoding,
    check_single_qubit,
    check_sampler_distribution,
    check_logical_angles,
    check_multiround,
    check_decoder,
)


def run_all() -> list[Check]:
    return [fn() for fn in ALL_CHECKS]
