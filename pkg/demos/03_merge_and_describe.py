"""From 61 clusters to a handful of proto-personas.

Overlapping runs at several beta values produce many near-duplicate
clusters. The bundled elder-meals study tables (four runs over 20
households x 47 dimensions) show the full workflow: score pairwise
similarity, build a dendrogram, cut it, merge each set, veto conflicting
dimensions, and render a templated description.
"""

from personaforge import (
    build_dendrogram,
    cut_dendrogram,
    describe,
    merge_clusters,
    radar_data,
    similarity,
    similarity_matrix,
)
from personaforge.fixtures import (
    elder_meals_cluster,
    elder_meals_clusters,
    elder_meals_dimensions,
)

clusters = elder_meals_clusters()
dims = {d.id: d for d in elder_meals_dimensions()}
print(f"{len(clusters)} clusters bundled across four beta runs")

# D65 and J65 share the same key members; the score reflects that they
# cluster on mostly the same dimensions with nearly identical means
d65, j65 = elder_meals_cluster("D65"), elder_meals_cluster("J65")
print(f"\nsim(D65, J65) = {similarity(d65, j65):.4f}"
      f"  (members {d65.members} vs {j65.members})")
print(f"sim(D65, L65) = {similarity(d65, elder_meals_cluster('L65')):.4f}"
      "  (a very different behaviour pattern)")

# dendrogram over one beta run, cut at two heights: the lower cut refines
# the higher one
run65 = elder_meals_clusters(0.65)
dend = build_dendrogram(similarity_matrix(run65), linkage="average")
for height in (0.5, 0.2):
    sets = cut_dendrogram(dend, height)
    print(f"\ncut at {height}: {len(sets)} merge sets")
    for group in sets:
        print("  ", group)

# merge the 'forthcoming recreational athlete' branch
athlete_ids = ["D65", "E65", "F65", "H65", "J65", "K65"]
persona = merge_clusters([elder_meals_cluster(i) for i in athlete_ids])
persona = type(persona)(persona.sources, persona.members, persona.dims,
                        name="Forthcoming recreational athlete")
print(f"\nmerged {athlete_ids} -> {len(persona.dims)} stable dimensions")
print("dim      mean   std    support  conflict")
for pd in persona.dims:
    flag = "CONFLICT" if pd.conflicting else ""
    print(f"{pd.dim_id:<6} {pd.mean:6.3f} {pd.std:6.3f}  {pd.support}/6      {flag}")

print("\n" + describe(persona, dims))

# radar comparison data: union of subspaces, greyed where a side does not
# cluster on the axis
doc = radar_data(d65, j65, dims)
greyed = [ax["dim"] for ax, g in zip(doc["axes"], doc["series"][1]["greyed"]) if g]
print(f"\nradar D65 vs J65: {len(doc['axes'])} axes; J65 greyed on {greyed}")

try:
    import matplotlib
    matplotlib.use("Agg")
    import math
    import matplotlib.pyplot as plt

    axes = doc["axes"]
    angles = [2 * math.pi * k / len(axes) for k in range(len(axes))]
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(7, 7))
    for series, colour in zip(doc["series"], ("tab:blue", "tab:orange")):
        pts = [(a, v) for a, v in zip(angles, series["values"]) if v is not None]
        pts.append(pts[0])
        ax.plot([p[0] for p in pts], [p[1] for p in pts], label=series["id"], color=colour)
    ax.set_xticks(angles)
    ax.set_xticklabels([a["dim"] for a in axes], fontsize=7)
    ax.set_ylim(0, 1)
    ax.legend()
    fig.savefig("radar_d65_j65.png", dpi=120)
    print("wrote radar_d65_j65.png")
except ImportError:
    print("matplotlib not installed; skipping the radar plot")
