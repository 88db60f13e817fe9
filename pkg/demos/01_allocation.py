"""Splitting a step's keyword budget between new and existing categories.

Run: python demos/01_allocation.py
"""

# %% The wider share follows last step's click share of new-category keywords.
from kwagent.allocation import DEEP_ONLY, FULL_ADAPTIVE, WIDE_ONLY, assign_deeper_quotas, compute_split, fixed_growth

for pw, pd in [(30, 70), (50, 50), (0, 0), (90, 10)]:
    plan = compute_split(pw, pd, 10)
    print(f"wider clicks {pw:>3}, deeper clicks {pd:>3} -> wider {plan.wider_count}, deeper {plan.deeper_count}")

# %% Odd budgets floor the wider side, so deeper gets the spare keyword.
plan = compute_split(50, 50, 7)
print("n=7 at an even split:", plan.wider_count, plan.deeper_count)

# %% The comparison policies ignore the observed clicks.
for name, variant in [("fixed 0.3", fixed_growth(0.3)), ("wide only", WIDE_ONLY), ("deep only", DEEP_ONLY), ("adaptive", FULL_ADAPTIVE)]:
    plan = compute_split(123, 456, 10, variant)
    print(f"{name:<10} -> {plan.wider_count}/{plan.deeper_count}")

# %% Deeper keywords are shared out by each category's cumulative clicks.
categories = {"Illness Coverage": 520, "Core Service": 310, "Attribute": 170}
print(assign_deeper_quotas(10, categories))
print(assign_deeper_quotas(7, {"A": 70, "B": 30}))
# nothing earned anywhere yet: equal shares, oldest categories first
print(assign_deeper_quotas(5, {"A": 0, "B": 0}))
