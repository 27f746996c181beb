"""Syndrome sampling and logical angles for coherent Z rotations.

One round applies ``prod_k exp(i theta_k Z_k)`` to the code state and reads
every X-face. On the Majorana side the round is a sequence of pair rotations
followed by pair measurements: qubit ``k`` is measured in the X basis and its
C4 stabilizer is re-imposed, which keeps the state Gaussian. The outcome
string ``m`` fixes the X-face syndrome.

Two engines run the same passes: ``"active"`` (numba, keeps only the coupled
part of the covariance matrix) and ``"dense"`` (plain numpy on the full
matrix, used as the reference).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import _engine
from .flo import EPS_MEAS, CovarianceMatrix
from .lattice import CodePatch, MajoranaNetwork, build_majorana_network, build_patch

ENGINES = ("active", "dense")


def syndrome_from_m(m: np.ndarray, patch: CodePatch) -> np.ndarray:
    """X-face syndrome ``s_f = prod_{k in f} m_k`` as ``±1`` int8."""
    m = np.asarray(m)
    return np.array([np.prod(m[list(f)]) for f in patch.x_faces], dtype=np.int8)


def _pair_arrays(pairs):
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


def _rep_arrays(network: MajoranaNetwork, key: str):
    return _pair_arrays([reps[key] for reps in network.pauli_reps])


@dataclass
class MSample:
    m: np.ndarray
    log_prob: float
    ps: np.ndarray
    peak_active: int


@dataclass
class RoundsRecord:
    """One noiseless multi-round shot."""

    s_rounds: np.ndarray  # (rounds, n_xfaces) int8
    corrections: list  # 2D correction support per round
    theta_rounds: np.ndarray  # logical angle contributed by each round
    m_rounds: np.ndarray | None = None

    @property
    def theta_star(self) -> float:
        from .decoder import fold_angle

        return fold_angle(float(np.sum(self.theta_rounds)))


class CoherentSampler:
    """Binds a patch and its Majorana network to array form for the engines."""

    def __init__(self, d: int, engine: str = "active"):
        if engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}, got {engine!r}")
        self.patch = build_patch(d)
        self.network = build_majorana_network(self.patch)
        self.engine = engine
        net = self.network
        self.n_maj = net.majorana_count
        self.zp, self.zq = _rep_arrays(net, "Z")
        self.xp, self.xq = _rep_arrays(net, "X")
        self.yp, self.yq = _rep_arrays(net, "SX")
        self.init = {k: _pair_arrays(net.initial_pairs(k)) for k in ("+", "Y")}
        top = np.zeros(self.patch.n)
        top[list(self.patch.z_logical_support)] = 1.0
        self._top_row = top

    @property
    def d(self) -> int:
        return self.patch.d

    # -- single passes -----------------------------------------------------

    def _check_angles(self, angles) -> np.ndarray:
        a = np.ascontiguousarray(angles, dtype=float)
        if a.shape != (self.patch.n,):
            raise ValueError(f"expected {self.patch.n} angles, got shape {a.shape}")
        return a

    def sample_m(self, angles, rng) -> MSample:
        """Draw the X-outcome string ``m`` for one round from ``|+_L>``."""
        a = self._check_angles(angles)
        u = rng.random(self.patch.n)
        if self.engine == "active":
            m = np.zeros(self.patch.n, dtype=np.int64)
            ps = np.zeros(self.patch.n)
            ip, iq = self.init["+"]
            logp, peak = _engine.sample_pass(
                self.n_maj, ip, iq, self.zp, self.zq, self.xp, self.xq, self.yp, self.yq, a, u, m, ps
            )
            return MSample(m.astype(np.int8), float(logp), ps, int(peak))
        return self._dense_pass(a, "+", uniforms=u)

    def forced_log_weight(self, angles, m=None, logical_state: str = "+") -> float:
        """``log`` of the weight of outcome string ``m`` (all ``+1`` by default)."""
        a = self._check_angles(angles)
        mf = np.ones(self.patch.n, dtype=np.int64) if m is None else np.asarray(m, dtype=np.int64)
        if self.engine == "active":
            ip, iq = self.init[logical_state]
            return float(
                _engine.forced_pass(self.n_maj, ip, iq, self.zp, self.zq, self.xp, self.xq, self.yp, self.yq, a, mf)
            )
        return self._dense_pass(a, logical_state, forced=mf)

    def _dense_pass(self, angles, logical_state, uniforms=None, forced=None):
        ip, iq = self.init[logical_state]
        cov = CovarianceMatrix.from_pairs(zip(ip, iq), self.n_maj // 2)
        n = self.patch.n
        m = np.zeros(n, dtype=np.int8)
        ps = np.zeros(n)
        logp = 0.0
        for k in range(n):
            cov.rotate(-angles[k], int(self.zp[k]), int(self.zq[k]))
            x = (int(self.xp[k]), int(self.xq[k]))
            y = (int(self.yp[k]), int(self.yq[k]))
            px_p = 0.5 * (1 + cov.entry(*x))
            px_m = 1.0 - px_p
            ps_p = cov.conditional_probability(x, y)
            ps_m = cov.conditional_probability(x[::-1], y[::-1])
            w_p, w_m = px_p * ps_p, px_m * ps_m
            if forced is None:
                p_plus = w_p / (w_p + w_m)
                mk = 1 if uniforms[k] < p_plus else -1
                logp += math.log(p_plus if mk > 0 else 1.0 - p_plus)
            else:
                mk = int(forced[k])
                px, pk = (px_p, ps_p) if mk > 0 else (px_m, ps_m)
                if px < EPS_MEAS or pk < EPS_MEAS:
                    return -math.inf
                logp += math.log(px) + math.log(pk)
            m[k] = mk
            ps[k] = ps_p if mk > 0 else ps_m
            if mk > 0:
                cov.measure(*x)
                cov.measure(*y)
            else:
                cov.measure(*x[::-1])
                cov.measure(*y[::-1])
        if forced is not None:
            return logp
        return MSample(m, logp, ps, self.n_maj)

    # -- logical angle -----------------------------------------------------

    def logical_angle(self, angles, correction=()) -> float:
        """Logical Z-rotation angle left after correcting with ``correction``.

        ``angles`` may already contain ``pi/2`` offsets from earlier
        corrections; ``correction`` is applied as ``Z`` on its support.
        """
        a = self._check_angles(angles).copy()
        a[list(correction)] += np.pi / 2
        flipped = a + (np.pi / 2) * self._top_row
        lx = self.forced_log_weight(a, None, "+") - self.forced_log_weight(flipped, None, "+")
        ly = self.forced_log_weight(a, None, "Y") - self.forced_log_weight(flipped, None, "Y")
        c2 = _tanh_half(lx)
        s2 = _tanh_half(ly)
        if c2 is None or s2 is None:
            raise RuntimeError("logical angle undetermined: forced passes have zero weight")
        return 0.5 * math.atan2(s2, c2)

    # -- rounds ------------------------------------------------------------

    @cached_property
    def decode2d(self):
        from .decoder import decode2d

        return decode2d(self.patch)

    def history_angles(self, theta, s_rounds) -> np.ndarray:
        """Per-round logical angles for a given noiseless syndrome history."""
        base = np.full(self.patch.n, float(theta)) if np.ndim(theta) == 0 else self._check_angles(theta)
        prev = ()
        out = []
        for s in s_rounds:
            a = base.copy()
            a[list(prev)] += np.pi / 2
            corr = tuple(self.decode2d(np.asarray(s)))
            out.append(self.logical_angle(a, corr))
            prev = corr
        return np.array(out)

    def sample_rounds(self, theta, rounds: int, rng, *, keep_m: bool = False, trace=None) -> RoundsRecord:
        """``rounds`` noiseless rounds of uniform rotation ``theta``.

        Round ``j`` carries the ``pi/2`` offsets of the previous round's 2D
        correction (the accumulated X-face flips are tracked, never applied).
        """
        base = np.full(self.patch.n, float(theta)) if np.ndim(theta) == 0 else self._check_angles(theta)
        prev = ()
        s_all, corr_all, th_all, m_all = [], [], [], []
        for j in range(rounds):
            a = base.copy()
            a[list(prev)] += np.pi / 2
            draw = self.sample_m(a, rng)
            s = syndrome_from_m(draw.m, self.patch)
            corr = tuple(self.decode2d(s))
            th = self.logical_angle(a, corr)
            s_all.append(s)
            corr_all.append(corr)
            th_all.append(th)
            if keep_m:
                m_all.append(draw.m)
            if trace is not None:
                trace.write(
                    json.dumps(
                        {
                            "round": j + 1,
                            "m": draw.m.tolist(),
                            "log_prob": draw.log_prob,
                            "ps": draw.ps.tolist(),
                            "syndrome": s.tolist(),
                            "correction": list(corr),
                            "theta_round": th,
                            "peak_active": draw.peak_active,
                        }
                    )
                    + "\n"
                )
            prev = corr
        return RoundsRecord(np.array(s_all, dtype=np.int8), corr_all, np.array(th_all), np.array(m_all) if keep_m else None)


@lru_cache(maxsize=16)
def get_sampler(d: int, engine: str = "active") -> CoherentSampler:
    """Shared sampler per ``(d, engine)``; samplers hold no per-shot state."""
    return CoherentSampler(d, engine)


def _tanh_half(log_ratio: float):
    """``tanh(x / 2)`` for ``x = log(P+ / P-)``; ``None`` when both are zero."""
    if math.isnan(log_ratio):
        return None
    if log_ratio == math.inf:
        return 1.0
    if log_ratio == -math.inf:
        return -1.0
    return math.tanh(0.5 * log_ratio)
