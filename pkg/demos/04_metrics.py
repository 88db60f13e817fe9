"""Scoring keyword lists for relevance and overlap.

Run: python demos/04_metrics.py
"""

from kwagent.metrics import (
    bleu2,
    evaluate_keywords,
    greedy_embed_f1,
    jaccard,
    linearize,
    render_comparison,
    rouge1_recall,
    set_cosine,
    tokenize,
)
from kwagent.tools import HashEmbedder

embedder = HashEmbedder()
search_text = "Sony medical insurance covers cancer treatment; apply online for the new hospital plan"
agent = ["cancer insurance", "medical insurance online", "hospital plan", "sony medical insurance"]
baseline = ["insurance", "cheap insurance", "best insurance company"]

# %% Token-level scores against search-result text. Japanese text is split per character.
print(tokenize("ソニー損保 cancer"))
cand, ref = linearize(agent), tokenize(search_text)
print("BLEU-2 ", round(bleu2(cand, ref), 4))
print("ROUGE-1", round(rouge1_recall(cand, ref), 4))
print("greedy embedding P/R/F1", tuple(round(x, 4) for x in greedy_embed_f1(cand, ref, embedder)))

# %% Set-level overlap between two keyword lists.
print("Jaccard", jaccard(agent, agent[:2] + ["other"]))
print("cosine ", round(set_cosine(agent, baseline, embedder), 4))

# %% Side-by-side table, values rounded half-even.
offline = ["cancer insurance", "medical insurance", "hospital cash plan"]
reports = [
    evaluate_keywords(name, kws, embedder, reference_text=search_text, offline_keywords=offline)
    for name, kws in [("agent", agent), ("baseline", baseline)]
]
print(render_comparison(reports))
