"""Scalable/unscalable brackets on the coherent threshold for several readout rates."""

import json
import math

from _common import parse, run_or_load

from coherent_surface.experiments import read_estimates
from coherent_surface.metrics import threshold_map

cfg, args = parse("threshold_map.json")
path = run_or_load(cfg, args)
brackets = threshold_map(read_estimates(path))
payload = []
for b in brackets:
    labels = " ".join(f"{p:.3f}:{lab[0]}" for p, lab in b.labels.items())
    print(f"q={b.q:.3f}: threshold in [{b.lower}, {b.upper}]  {labels}")
    payload.append({"q": b.q, "lower": None if math.isnan(b.lower) else b.lower,
                    "upper": None if math.isnan(b.upper) else b.upper,
                    "labels": {f"{p:.6g}": v for p, v in b.labels.items()}})  # fmt: skip
path.with_suffix(".brackets.json").write_text(json.dumps(payload, indent=2) + "\n")
