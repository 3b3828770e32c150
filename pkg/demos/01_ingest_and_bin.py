"""Ingesting VAS scores and binning them into categories.

A VAS study produces one score in [0, 1] per subject per behavioural
dimension; skipped scales leave holes in the matrix. This walkthrough
loads a small score CSV, shows how validation reacts to bad input, and
bins the scores the way the MCA comparison expects.
"""

import numpy as np

from personaforge import DatasetError, bin_to_categories, ingest_csv

CSV = """\
subject,d1:Healthy,d2:Mobility,d3:Cooks daily,d4:Eats alone
anna,0.92,0.88,0.95,0.10
bent,0.15,0.20,,0.85
carl,0.85,0.95,0.90,0.05
dora,0.10,0.25,0.15,0.95
erik,0.90,0.80,0.85,0.45
"""

data = ingest_csv(CSV)
print(f"{len(data.subjects)} subjects x {len(data.dimensions)} dimensions")
print("dimension labels:", [d.label for d in data.dimensions])

# empty cells are explicit missing values, not zeros
print("\nbent's row:", data.values[1], "(NaN = scale was skipped)")

# validation names the offending cell
try:
    ingest_csv("subject,d1\nanna,1.7\n")
except DatasetError as exc:
    print("\nrejected bad input:", exc)

# equal-width binning: 2 bins for polarized dimensions, 3 otherwise.
# d4 spreads over the scale, so auto mode gives it three bins.
table = bin_to_categories(data)
print("\nbins per dimension:")
for var in table.variables:
    cats = "/".join(var.all_categories)
    print(f"  {var.dimension_id}: {cats}")

print("\ncategory assignments:")
for i, sid in enumerate(table.subject_ids):
    row = [table.category_label(i, j) for j in range(len(table.variables))]
    print(f"  {sid}: {row}")

# a forced 3-bin view of d1 for comparison
forced = bin_to_categories(data, {"d1": 3})
print("\nd1 with three bins:",
      [forced.category_label(i, 0) for i in range(len(data.subjects))])

# the canonical JSON export round-trips the matrix exactly
print("\nJSON export starts with:", data.to_json()[:60], "...")
