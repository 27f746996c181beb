"""Sweep orchestration: noiseless coherent shots, readout resampling, CSV output.

Seeding: the noiseless shot ``i`` at ``(d, p)`` draws from
``SeedSequence([master, d, pkey, i])`` and its readout resamples at ``q``
from ``SeedSequence([master, d, pkey, qkey, i, 1])``, where ``pkey`` and
``qkey`` are the rates in units of 1e-12. Outputs therefore do not depend on
how shots are split across workers, and the same noiseless shots are reused
for every ``q``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing as mp
import platform
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .decoder import (
    LOGICAL_Z,
    apply_readout_noise,
    build_detection_graph,
    detection_events,
    fold_angle,
    mwpm_decode_batch,
)
from .incoherent import estimate_failure
from .lattice import build_patch
from .metrics import CSV_COLUMNS, MetricEstimate, estimate_metrics
from .sampler import get_sampler

BASELINE_COLUMNS = ("d", "p", "q", "shots", "failures", "p_fail", "p_fail_err")


class ConfigError(ValueError):
    """Invalid sweep configuration."""


@dataclass
class SweepConfig:
    """One sweep over a ``(d, p, q)`` grid.

    ``p_list`` holds physical error rates ``p = sin^2 theta``; ``theta_list``
    may be given instead. With ``q_equals_p`` the readout rate follows ``p``
    and ``q_list`` is ignored. ``shots_noiseless`` is multiplied by ``d`` when
    ``shots_scale_with_d`` is set. ``mode`` is ``"coherent"`` or
    ``"incoherent"``; in coherent mode ``baseline_shots > 0`` also runs the
    incoherent baseline for the twirl ratios.
    """

    d_list: list = field(default_factory=lambda: [3])
    p_list: list = field(default_factory=list)
    theta_list: list = field(default_factory=list)
    q_list: list = field(default_factory=lambda: [0.0])
    q_equals_p: bool = False
    shots_noiseless: int = 100
    shots_scale_with_d: bool = False
    resamples_readout: int = 10
    baseline_shots: int = 0
    master_seed: int = 0
    output: str = "results/sweep.csv"
    workers: int = 1
    mode: str = "coherent"
    chunk: int = 250
    rounds: int | None = None  # defaults to d

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in ("coherent", "incoherent"):
            raise ConfigError(f"mode must be 'coherent' or 'incoherent', got {self.mode!r}")
        if not self.d_list or any(int(d) != d or d < 1 or d % 2 == 0 for d in self.d_list):
            raise ConfigError(f"d_list must hold odd positive integers, got {self.d_list}")
        if bool(self.p_list) == bool(self.theta_list):
            raise ConfigError("give exactly one of p_list and theta_list")
        for p in self.rates():
            if not 0.0 <= p < 0.5:
                raise ConfigError(f"error rate {p} outside [0, 1/2)")
        for q in self.q_list:
            if not 0.0 <= q < 0.5:
                raise ConfigError(f"readout rate {q} outside [0, 1/2)")
        for name in ("shots_noiseless", "resamples_readout", "workers", "chunk"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.baseline_shots < 0:
            raise ConfigError("baseline_shots must be non-negative")
        if self.rounds is not None and int(self.rounds) < 1:
            raise ConfigError("rounds must be positive")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")

    def rates(self) -> list:
        if self.p_list:
            return [float(p) for p in self.p_list]
        return [math.sin(t) ** 2 for t in self.theta_list]

    def thetas(self) -> list:
        if self.theta_list:
            return [float(t) for t in self.theta_list]
        return [math.asin(math.sqrt(p)) for p in self.p_list]

    def q_values(self, p: float) -> list:
        return [p] if self.q_equals_p else [float(q) for q in self.q_list]

    def rounds_for(self, d: int) -> int:
        return d if self.rounds is None else int(self.rounds)

    def shots_for(self, d: int) -> int:
        return self.shots_noiseless * (d if self.shots_scale_with_d else 1)

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)


def rate_key(x: float) -> int:
    return int(round(x * 1e12))


def noiseless_seed(master: int, d: int, p: float, shot: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, d, rate_key(p), shot])


def readout_seed(master: int, d: int, p: float, q: float, shot: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([master, d, rate_key(p), rate_key(q), shot, 1])


# ---------------------------------------------------------------------------
# noiseless shots


def noiseless_chunk(args):
    """Worker task: shots ``[start, stop)`` at ``(d, theta)``.

    Returns ``(theta_star, s_rounds, c2d_class_bits)`` where the last array
    holds the final-round 2D correction as a qubit indicator.
    """
    d, p, theta, master, start, stop, rounds = args
    sampler = get_sampler(d)
    n_x = len(sampler.patch.x_faces)
    k = stop - start
    theta_star = np.zeros(k)
    s_all = np.zeros((k, rounds, n_x), dtype=np.int8)
    c_last = np.zeros((k, sampler.patch.n), dtype=np.uint8)
    for j, shot in enumerate(range(start, stop)):
        rng = np.random.default_rng(noiseless_seed(master, d, p, shot))
        rec = sampler.sample_rounds(theta, rounds, rng)
        theta_star[j] = rec.theta_star
        s_all[j] = rec.s_rounds
        c_last[j, list(rec.corrections[-1])] = 1
    return theta_star, s_all, c_last


def run_noiseless(d, p, theta, master, shots, rounds=None, workers=1, chunk=250, pool=None):
    rounds = d if rounds is None else rounds
    tasks = [(d, p, theta, master, a, min(a + chunk, shots), rounds) for a in range(0, shots, chunk)]
    if pool is not None and workers > 1:
        parts = pool.map(noiseless_chunk, tasks)
    else:
        parts = [noiseless_chunk(t) for t in tasks]
    return tuple(np.concatenate([part[i] for part in parts]) for i in range(3))


def readout_angles(patch, theta_star, s_all, c_last, q, p, master, resamples, graph=None):
    """Final logical angles ``(shots, resamples)`` after noisy 3D decoding."""
    d = patch.d
    rounds = s_all.shape[1]
    graph = graph or build_detection_graph(patch, rounds, p, q)
    shots = len(theta_star)
    noisy = np.empty((shots, resamples) + s_all.shape[1:], dtype=np.int8)
    for i in range(shots):
        rng = np.random.default_rng(readout_seed(master, d, p, q, i))
        noisy[i] = apply_readout_noise(s_all[i], q, rng, resamples)
    events = detection_events(noisy).reshape(shots * resamples, -1)
    if not events.any():
        corr = np.zeros((shots * resamples, patch.n), dtype=np.uint8)
    else:
        corr = mwpm_decode_batch(graph, events)
    total = corr.reshape(shots, resamples, -1) ^ c_last[:, None, :]
    if np.any((total @ patch.x_check_matrix.T) % 2):
        raise RuntimeError("combined correction leaves a nontrivial syndrome")
    cls = total[:, :, list(patch.x_logical_support)].sum(axis=2) % 2
    return fold_angle(theta_star[:, None] + np.where(cls == LOGICAL_Z, np.pi / 2, 0.0))


# ---------------------------------------------------------------------------
# sweeps


@dataclass
class SweepResult:
    estimates: list
    baseline: list
    csv_path: Path
    manifest_path: Path
    baseline_path: Path | None = None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _baseline_row(est) -> list:
    return [str(est.d), f"{est.p:.12g}", f"{est.q:.12g}", str(est.shots), str(est.failures),
            f"{est.p_fail:.12g}", f"{est.stderr:.12g}"]  # fmt: skip


def run_sweep(config: SweepConfig, *, progress=None) -> SweepResult:
    """Run the grid, write the CSV(s) and a JSON manifest next to them."""
    t0 = time.time()
    out = Path(config.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    estimates, baseline = [], []
    pool = mp.get_context("fork").Pool(config.workers) if config.workers > 1 else None
    try:
        for d in config.d_list:
            for p, theta in zip(config.rates(), config.thetas()):
                qs = config.q_values(p)
                if config.mode == "incoherent":
                    for q in qs:
                        rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, d, rate_key(p), rate_key(q), 2]))
                        baseline.append(estimate_failure(d, p, q, config.shots_for(d), rng))
                        if progress:
                            progress(f"d={d} p={p:.4g} q={q:.4g} p_fail={baseline[-1].p_fail:.4g}")
                    continue
                shots = config.shots_for(d)
                ts, s_all, c_last = run_noiseless(
                    d, p, theta, config.master_seed, shots, config.rounds_for(d), config.workers, config.chunk, pool
                )
                patch = build_patch(d)
                for q in qs:
                    th = readout_angles(patch, ts, s_all, c_last, q, p, config.master_seed, config.resamples_readout)
                    pf = None
                    pf_err = 0.0
                    if config.baseline_shots:
                        rng = np.random.default_rng(np.random.SeedSequence([config.master_seed, d, rate_key(p), rate_key(q), 2]))
                        b = estimate_failure(d, p, q, config.baseline_shots, rng)
                        baseline.append(b)
                        pf, pf_err = b.p_fail, b.stderr
                    est = estimate_metrics(th, d=d, p=p, q=q, theta=theta, p_fail=pf, p_fail_err=pf_err)
                    estimates.append(est)
                    if progress:
                        progress(f"d={d} p={p:.4g} q={q:.4g} pli={est.pli:.4g}±{est.pli_err:.2g} pld={est.pld:.4g}")
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    baseline_path = None
    if config.mode == "incoherent":
        out.write_text(_csv_text(BASELINE_COLUMNS, [_baseline_row(b) for b in baseline]))
    else:
        out.write_text(_csv_text(CSV_COLUMNS, [e.csv_row() for e in estimates]))
        if baseline:
            baseline_path = out.with_name(out.stem + "_baseline.csv")
            baseline_path.write_text(_csv_text(BASELINE_COLUMNS, [_baseline_row(b) for b in baseline]))
    manifest = {
        "config": asdict(config),
        "master_seed": config.master_seed,
        "version": f"coherent_surface {__version__}",
        "python": platform.python_version(),
        "numpy": np.__version__,
        "wall_time_s": round(time.time() - t0, 3),
        "outputs": [str(out)] + ([str(baseline_path)] if baseline_path else []),
    }
    manifest_path = out.with_suffix(".manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n")
    return SweepResult(estimates, baseline, out, manifest_path, baseline_path)


def read_estimates(path) -> list[MetricEstimate]:
    """Load a coherent-sweep CSV back into ``MetricEstimate`` rows."""
    rows = []
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            vals = {k: float(v) for k, v in r.items()}
            for k in ("d", "shots", "resamples"):
                vals[k] = int(vals[k])
            rows.append(MetricEstimate(**vals))
    return rows


def read_baseline(path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {k: (int(v) if k in ("d", "shots", "failures") else float(v)) for k, v in r.items()}
            for r in csv.DictReader(fh)
        ]
