"""Comparing allocation policies on the same fixture.

The catalog model does exactly what the allocation asks, so any
difference in clicks comes from the policy alone.

Run: python demos/06_ablation.py
"""

from pathlib import Path

import kwagent
from kwagent.ablation import render_ablation, run_ablation
from kwagent.config import load_run_config
from kwagent.domain import PolicyVariant

CONFIG = Path(kwagent.__file__).parent / "data" / "ablation" / "ablation.ini"

variants = [PolicyVariant.parse(v) for v in ("full", "fixed:0.5", "wide_only", "deep_only")]
data = run_ablation(load_run_config(CONFIG), variants)
print(render_ablation(data))

# %% Category growth per policy: wide-only keeps opening, deep-only never does.
for entry in data["variants"]:
    print(f"{entry['variant']:<18}", entry["categories"])
