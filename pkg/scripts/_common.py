"""Shared helpers for the experiment scripts."""

import argparse
import logging
from pathlib import Path

from coherent_surface.experiments import SweepConfig

ROOT = Path(__file__).resolve().parent.parent


def parse(default_config: str) -> tuple[SweepConfig, argparse.Namespace]:
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=str(ROOT / "scripts" / "configs" / default_config))
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--quick", action="store_true", help="shrink shot counts tenfold for a smoke run")
    ap.add_argument("--out", default=None)
    ap.add_argument("--refit", action="store_true", help="skip the sweep and analyze the existing CSV")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    cfg = SweepConfig.from_json(args.config)
    if not Path(cfg.output).is_absolute():
        cfg.output = str(ROOT / cfg.output)
    if args.workers:
        cfg.workers = args.workers
    if args.out:
        cfg.output = args.out
    if args.quick:
        cfg.shots_noiseless = max(1, cfg.shots_noiseless // 10)
        cfg.baseline_shots = cfg.baseline_shots // 10
    return cfg, args


def run_or_load(cfg: SweepConfig, args) -> Path:
    """Run the sweep unless ``--refit`` asks to reuse the CSV already on disk."""
    from coherent_surface.experiments import run_sweep

    path = Path(cfg.output)
    if args.refit:
        if not path.exists():
            raise SystemExit(f"--refit given but {path} does not exist")
        return path
    return run_sweep(cfg, progress=logging.info).csv_path
