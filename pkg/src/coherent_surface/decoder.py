"""Phenomenological readout noise and 3D minimum-weight perfect matching.

Syndromes are ``±1`` int8 arrays over the X-faces; a 3D syndrome has shape
``(rounds, n_xfaces)``. The last round is never corrupted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import networkx as nx
import numpy as np
import pymatching
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .lattice import CodePatch

SENTINEL_WEIGHT = 1e6
IDENTITY, LOGICAL_Z = 0, 1


def log_weight(rate: float) -> float:
    """``ln((1 - rate) / rate)``; the sentinel for ``rate == 0``."""
    if not 0.0 <= rate < 0.5:
        raise ValueError(f"error rate must lie in [0, 1/2), got {rate}")
    if rate == 0.0:
        return SENTINEL_WEIGHT
    return math.log((1.0 - rate) / rate)


def fold_angle(theta):
    """Map angles into ``(-pi/2, pi/2]`` (logical angles are defined modulo pi)."""
    t = np.mod(np.asarray(theta, dtype=float) + np.pi / 2, np.pi) - np.pi / 2
    t = np.where(np.isclose(t, -np.pi / 2, rtol=0.0, atol=1e-15), np.pi / 2, t)
    return float(t) if np.ndim(t) == 0 else t


@dataclass(frozen=True)
class Correction:
    z_support: tuple[int, ...]
    matched_pairs: tuple = ()
    weight: float = 0.0


@dataclass(frozen=True)
class DetectionGraph:
    """Space-time matching graph over ``(X-face, round)`` vertices.

    Vertex ``t * n_x + f`` is face ``f`` in round ``t`` (0-based). The two
    boundary super-nodes ``left`` and ``right`` follow the face vertices.
    ``edges`` rows are ``(u, v, weight, qubit)``; ``qubit = -1`` marks a
    timelike edge. Edges whose rate is zero carry the sentinel weight and are
    left out of the matching graph.
    """

    patch: CodePatch
    rounds: int
    p: float
    q: float
    w_s: float
    w_t: float
    edges: tuple = field(repr=False)

    @property
    def n_x(self) -> int:
        return len(self.patch.x_faces)

    @property
    def num_detectors(self) -> int:
        return self.n_x * self.rounds

    @property
    def left(self) -> int:
        return self.num_detectors

    @property
    def right(self) -> int:
        return self.num_detectors + 1

    @cached_property
    def active_edges(self) -> list:
        return [e for e in self.edges if e[2] < SENTINEL_WEIGHT]

    @cached_property
    def matching(self) -> pymatching.Matching:
        m = pymatching.Matching()
        bnd = {self.left, self.right}
        for u, v, w, qb in self.active_edges:
            fid = {qb} if qb >= 0 else set()
            if v in bnd:
                m.add_boundary_edge(u, fault_ids=fid, weight=w)
            else:
                m.add_edge(u, v, fault_ids=fid, weight=w)
        m.ensure_num_fault_ids(self.patch.n)
        if m.num_detectors < self.num_detectors:
            # isolated detectors (possible when an edge class is excluded) still need a node
            m.add_boundary_edge(self.num_detectors - 1, weight=SENTINEL_WEIGHT, merge_strategy="keep-original")
        return m

    @cached_property
    def _csgraph(self):
        n = self.num_detectors + 2
        rows, cols, vals = [], [], []
        for u, v, w, _ in self.active_edges:
            rows += [u, v]
            cols += [v, u]
            vals += [w, w]
        return csr_matrix((vals, (rows, cols)), shape=(n, n))

    @cached_property
    def edge_qubit(self) -> dict:
        return {(min(u, v), max(u, v)): qb for u, v, _, qb in self.active_edges}


def build_detection_graph(patch: CodePatch, rounds: int, p: float, q: float) -> DetectionGraph:
    if rounds < 1:
        raise ValueError("need at least one round")
    w_s, w_t = log_weight(p), log_weight(q)
    nx_ = len(patch.x_faces)
    left, right = nx_ * rounds, nx_ * rounds + 1
    spatial = {}
    for qb in range(patch.n):
        fs = patch.qubit_x_faces[qb]
        if len(fs) == 2:
            key = tuple(sorted(fs))
        elif len(fs) == 1:
            col = patch.coords(qb)[1]
            key = (fs[0], "L" if col == 0 else "R")
        else:
            continue
        spatial.setdefault(key, qb)  # parallel edges: keep the lowest qubit index
    edges = []
    for t in range(rounds):
        off = t * nx_
        for key, qb in sorted(spatial.items(), key=lambda kv: kv[1]):
            a, b = key
            if b == "L":
                edges.append((off + a, left, w_s, qb))
            elif b == "R":
                edges.append((off + a, right, w_s, qb))
            else:
                edges.append((off + a, off + b, w_s, qb))
        if t + 1 < rounds:
            for f in range(nx_):
                edges.append((off + f, off + nx_ + f, w_t, -1))
    return DetectionGraph(patch=patch, rounds=rounds, p=p, q=q, w_s=w_s, w_t=w_t, edges=tuple(edges))


# ---------------------------------------------------------------------------
# readout noise and detection events


def apply_readout_noise(s_rounds: np.ndarray, q: float, rng, resamples: int | None = None) -> np.ndarray:
    """Flip each recorded outcome of rounds ``1..d-1`` with probability ``q``.

    With ``resamples`` given, returns ``resamples`` independent noisy copies
    stacked on a new leading axis.
    """
    if not 0.0 <= q < 0.5:
        raise ValueError(f"readout error rate must lie in [0, 1/2), got {q}")
    s = np.asarray(s_rounds, dtype=np.int8)
    shape = s.shape if resamples is None else (resamples,) + s.shape
    out = np.broadcast_to(s, shape).copy()
    if q > 0 and s.shape[0] > 1:
        flips = rng.random(shape[:-2] + (s.shape[0] - 1, s.shape[1])) < q
        out[..., :-1, :] = np.where(flips, -out[..., :-1, :], out[..., :-1, :])
    return out


def detection_events(s_noisy: np.ndarray) -> np.ndarray:
    """Boolean ``(..., rounds, n_x)``: outcome differs from the previous round.

    Round 1 is compared against the ``+1`` reference of the initial code state.
    """
    s = np.asarray(s_noisy)
    prev = np.concatenate([np.ones_like(s[..., :1, :]), s[..., :-1, :]], axis=-2)
    return s != prev


# ---------------------------------------------------------------------------
# decoding


def mwpm_decode(graph: DetectionGraph, events: np.ndarray) -> Correction:
    """Exact MWPM via PyMatching; returns the Z-support of the correction."""
    ev = np.asarray(events, dtype=np.uint8).reshape(-1)
    if not ev.any():
        return Correction(())
    corr, weight = graph.matching.decode(ev, return_weight=True)
    return Correction(tuple(int(k) for k in np.flatnonzero(corr)), weight=float(weight))


def mwpm_decode_batch(graph: DetectionGraph, events: np.ndarray) -> np.ndarray:
    """Decode many shots; returns a ``(shots, n)`` uint8 array of Z-supports."""
    ev = np.asarray(events, dtype=np.uint8).reshape(len(events), -1)
    return graph.matching.decode_batch(ev)


def mwpm_decode_reference(graph: DetectionGraph, events: np.ndarray) -> Correction:
    """Exact MWPM on the defect complete graph (Dijkstra distances + blossom).

    Every defect gets a private boundary copy; boundary copies are joined by
    zero-weight edges so any parity can be absorbed.
    """
    ev = np.flatnonzero(np.asarray(events, dtype=bool).reshape(-1))
    if len(ev) == 0:
        return Correction(())
    dist, pred = dijkstra(graph._csgraph, directed=False, indices=ev, return_predecessors=True)
    nd = len(ev)
    bnd_choice = []
    for i in range(nd):
        dl, dr = dist[i, graph.left], dist[i, graph.right]
        bnd_choice.append(graph.left if dl <= dr else graph.right)
    g = nx.Graph()
    big = 1.0
    for i in range(nd):
        for j in range(i + 1, nd):
            big += dist[i, ev[j]]
        big += dist[i, bnd_choice[i]]
    big = 2.0 * big + 1.0
    for i in range(nd):
        for j in range(i + 1, nd):
            if np.isfinite(dist[i, ev[j]]):
                g.add_edge(("d", i), ("d", j), weight=big - dist[i, ev[j]])
                g.add_edge(("b", i), ("b", j), weight=big)
        if np.isfinite(dist[i, bnd_choice[i]]):
            g.add_edge(("d", i), ("b", i), weight=big - dist[i, bnd_choice[i]])
    mate = nx.max_weight_matching(g, maxcardinality=True)
    if 2 * len(mate) != g.number_of_nodes():
        raise RuntimeError("matching is not perfect")
    support = np.zeros(graph.patch.n, dtype=np.uint8)
    pairs = []
    total = 0.0
    for a, b in sorted(tuple(sorted(e, key=lambda v: (v[0] != "d", v[1]))) for e in mate):
        if a[0] == "b":
            continue  # boundary copy matched to boundary copy
        i = a[1]
        target = ev[b[1]] if b[0] == "d" else bnd_choice[i]
        total += dist[i, target]
        pairs.append((int(ev[i]), int(target)))
        node = target
        while node != ev[i]:
            prev = pred[i, node]
            qb = graph.edge_qubit[(min(prev, node), max(prev, node))]
            if qb >= 0:
                support[qb] ^= 1
            node = prev
    return Correction(tuple(int(k) for k in np.flatnonzero(support)), tuple(pairs), float(total))


def mwpm_weight_bruteforce(graph: DetectionGraph, events: np.ndarray, max_defects: int = 12) -> float:
    """Minimum matching weight by exhaustive recursion over pairings.

    Each defect pairs with another defect or with its nearest boundary.
    Exponential; only for cross-checking on small instances.
    """
    ev = np.flatnonzero(np.asarray(events, dtype=bool).reshape(-1))
    if len(ev) > max_defects:
        raise ValueError(f"brute force limited to {max_defects} defects, got {len(ev)}")
    if len(ev) == 0:
        return 0.0
    dist = dijkstra(graph._csgraph, directed=False, indices=ev)
    to_bnd = np.minimum(dist[:, graph.left], dist[:, graph.right])
    pair = dist[:, ev]

    @lru_cache(maxsize=None)
    def best(mask: int) -> float:
        if mask == 0:
            return 0.0
        i = (mask & -mask).bit_length() - 1
        rest = mask & ~(1 << i)
        out = to_bnd[i] + best(rest)
        j_mask = rest
        while j_mask:
            j = (j_mask & -j_mask).bit_length() - 1
            j_mask &= j_mask - 1
            out = min(out, pair[i, j] + best(rest & ~(1 << j)))
        return out

    return float(best((1 << len(ev)) - 1))


def decode2d(patch: CodePatch, p: float = 0.1):
    """Perfect-readout 2D decoder ``s -> Z-support`` for a single round."""
    if patch.d == 1:
        return lambda s: ()
    graph = build_detection_graph(patch, 1, p if p > 0 else 0.1, 0.0)

    def decode(s):
        return mwpm_decode(graph, detection_events(np.asarray(s)[None, :])).z_support

    decode.graph = graph
    return decode


def logical_class(z_support, patch: CodePatch, *, check: bool = True) -> int:
    """``LOGICAL_Z`` iff the Z-string anticommutes with the logical X (left column)."""
    supp = set(z_support)
    if check and patch.d > 1:
        if np.any(patch.x_syndrome(supp) != 1):
            raise RuntimeError("combined correction leaves a nontrivial syndrome")
    return len(supp & set(patch.x_logical_support)) % 2


def final_angle(theta_star: float, cls: int) -> float:
    return fold_angle(theta_star + (np.pi / 2 if cls == LOGICAL_Z else 0.0))
