"""A full offline campaign with the bundled worked example.

The scripted model replays four recorded answers (initial keywords plus
three rounds); search results, embeddings and KPIs are all local.

Run: python demos/05_campaign.py
"""

from pathlib import Path

import kwagent
from kwagent.config import build_toolbox, load_run_config
from kwagent.orchestrator import run_campaign

CONFIG = Path(kwagent.__file__).parent / "data" / "demo" / "demo.ini"

# %% Build the tools from the config file and run three steps.
run = load_run_config(CONFIG)
tools = build_toolbox(run)
report = run_campaign(run.campaign, tools)

# %% Each step: the split, what was accepted, what it earned.
for outcome in report.outcomes:
    plan = outcome.allocation
    split = "initial" if plan is None else f"wider {plan.wider_count} / deeper {plan.deeper_count}"
    print(f"step {outcome.step}: {split:<22} accepted {len(outcome.keyword_set):>2}  "
          f"clicks wider={outcome.group_kpi_wider} deeper={outcome.group_kpi_deeper}")
    for warning in outcome.warnings:
        print("   note:", warning)

print("categories after each step:", " -> ".join(map(str, report.category_counts())))
print("total clicks:", report.objective_total)

# %% What the model saw on the last step (first lines of the prompt).
print("\n".join(tools.model.transcript[-1].splitlines()[:3]))
