"""Assigning KPIs to generated keywords from an offline dataset.

A generated keyword takes the KPIs of its most similar dataset keyword
when the cosine is above 0.6, and zero traffic otherwise.

Run: python demos/03_replay_simulator.py
"""

from pathlib import Path

import kwagent
from kwagent.domain import Keyword, Origin
from kwagent.simulator import ReplayKpiSource, aggregate_kpis, load_dataset, match_keyword, normalize_kpi_table
from kwagent.tools import HashEmbedder

DATA = Path(kwagent.__file__).parent / "data" / "demo" / "dataset.csv"

# %% Load one product's rows from the bundled dataset.
rows = load_dataset(DATA, product_filter="Sony Medical Insurance")
print(len(rows), "rows; first:", rows[0])

# %% Nearest-row matching.
embedder = HashEmbedder()
for probe in ["cancer insurance", "Cancer  Insurance plans", "sony bank mortgage", "video game console"]:
    hit = match_keyword(probe, rows, embedder)
    print(f"{probe!r:<28} ->", "no match" if hit is None else f"{hit[0].keyword!r} ({hit[1]:.3f}, clicks={hit[0].clicks})")

# %% The KPI source does the same for a whole step of keywords.
source = ReplayKpiSource(rows, embedder)
step = [Keyword(s, "demo", Origin.WIDER, 1) for s in ["cancer insurance", "video game console"]]
for key, record in source.observe(step).items():
    print(key, record.to_dict())

# %% Comparing methods: mean KPIs per method, then max-scaled for the table.
groups = {
    "method A": aggregate_kpis([r.kpis for r in rows[:10]]),
    "method B": aggregate_kpis([r.kpis for r in rows[10:20]]),
}
for name, values in normalize_kpi_table(groups).items():
    print(name, {k: round(v, 2) for k, v in values.items()})
