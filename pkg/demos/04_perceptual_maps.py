"""Cross-checking clusters against correspondence-analysis maps.

Two complementary views of the same people: a perceptual map built from
how often subjects co-occur in subspace clusters, and an MCA map built
purely from binned categories. If the clustering captures the main
variance in the data, the maps should separate the same groups.
"""

import numpy as np

from personaforge import (
    bin_to_categories,
    cooccurrence,
    correspondence_analysis,
    mca,
    variable_axis_correlation,
)
from personaforge.dataset import Dimension, Subject, VasDataSet
from personaforge.fixtures import ELDER_MEALS_TRASH, elder_meals_clusters

clusters = elder_meals_clusters()

# the four broad-but-shallow clusters would swamp the counts; the study
# excluded them from the contingency table
table = cooccurrence(clusters, exclude=ELDER_MEALS_TRASH)
print("co-occurrence counts (first 6 subjects):")
for sid, row in list(zip(table.subject_ids, table.counts))[:6]:
    print(f"  {sid:>2}: {row.tolist()}")
print(f"subject 16 shares a cluster with 20 in {table.value('16', '20')} runs,"
      f" with 1 in {table.value('16', '1')}")

pmap = correspondence_analysis(table.counts, row_ids=table.subject_ids,
                               col_ids=table.subject_ids)
print(f"\nCA axes explain {pmap.inertia_pct[0]:.1f}% and {pmap.inertia_pct[1]:.1f}%"
      " of inertia")
print("first-axis coordinates (sign groups the subjects):")
order = sorted(pmap.row_ids, key=lambda s: pmap.row_coord(s)[0])
for sid in order:
    x = pmap.row_coord(sid)[0]
    print(f"  {sid:>2}: {x:+.3f} {'#' * int(abs(x) * 20)}")

# an MCA over binned categories of a synthetic look-alike matrix
rng = np.random.default_rng(7)
groups = rng.integers(0, 4, 20)
values = np.empty((20, 47))
for j in range(47):
    kind = rng.uniform()
    if kind < 0.45:
        poles = rng.choice([0.1, 0.9], size=4)
        values[:, j] = np.clip(poles[groups] + rng.uniform(-0.15, 0.15, 20), 0, 1)
    elif kind < 0.75:
        pole = np.where(rng.uniform(size=20) < 0.5, 0.1, 0.9)
        values[:, j] = np.clip(pole + rng.uniform(-0.15, 0.15, 20), 0, 1)
    else:
        values[:, j] = rng.uniform(0, 1, 20)
values[rng.uniform(size=values.shape) < 0.05] = np.nan
data = VasDataSet(tuple(Subject(str(i + 1)) for i in range(20)),
                  tuple(Dimension(f"d{j + 1}") for j in range(47)), values)

cat = bin_to_categories(data)
mca_map = mca(cat)
print(f"\nMCA on the binned look-alike: first axes carry "
      f"{mca_map.inertia_pct[0]:.1f}% and {mca_map.inertia_pct[1]:.1f}%")

# which variables drive the axes
ids, eta = variable_axis_correlation(cat, mca_map, axes=2)
top = np.argsort(-eta[:, 0])[:5]
print("variables most correlated with axis 1:")
for j in top:
    print(f"  {ids[j]}: eta^2 = {eta[j, 0]:.2f}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 2, figsize=(11, 5))
    for ax, m, title in ((axes[0], pmap, "co-occurrence CA"),
                         (axes[1], mca_map, "MCA of binned categories")):
        xy = m.row_coords[:, :2]
        ax.scatter(xy[:, 0], xy[:, 1], s=12)
        for sid, (x, y) in zip(m.row_ids, xy):
            ax.annotate(sid, (x, y), fontsize=8)
        ax.axhline(0, lw=0.5, color="grey")
        ax.axvline(0, lw=0.5, color="grey")
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig("perceptual_maps.png", dpi=120)
    print("\nwrote perceptual_maps.png")
except ImportError:
    print("\nmatplotlib not installed; skipping the map plot")
