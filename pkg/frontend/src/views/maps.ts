/** Side-by-side perceptual maps: cluster co-occurrence CA next to the MCA
 * of binned categories, both straight from service coordinates. */

import { PerceptualMapDoc } from "../api.js";
import { clear, el, fmt, svgEl } from "../dom.js";

const W = 340;
const H = 300;
const PAD = 26;

function scatter(doc: PerceptualMapDoc, title: string, id: string): HTMLElement {
  const xs = doc.rows.map((r) => r.coords[0] ?? 0);
  const ys = doc.rows.map((r) => r.coords[1] ?? 0);
  const span = Math.max(...xs.map(Math.abs), ...ys.map(Math.abs), 1e-9);
  const sx = (x: number): number => W / 2 + (x / span) * (W / 2 - PAD);
  const sy = (y: number): number => H / 2 - (y / span) * (H / 2 - PAD);

  const points = doc.rows.flatMap((row) => {
    const x = sx(row.coords[0] ?? 0);
    const y = sy(row.coords[1] ?? 0);
    return [
      svgEl("circle", { cx: x, cy: y, r: 3, fill: "#4477aa", class: "map-point",
                        "data-id": row.id }),
      svgEl("text", { x: x + 4, y: y - 3, "font-size": 9 },
            [document.createTextNode(row.id)]),
    ];
  });

  const pct = doc.inertia_pct;
  const caption = pct.length >= 2
    ? `axes: ${fmt(pct[0], 1)}% / ${fmt(pct[1], 1)}% of inertia`
    : "degenerate map";
  return el("figure", { class: "map", id }, [
    el("figcaption", {}, [title + " - " + caption]),
    svgEl("svg", { viewBox: `0 0 ${W} ${H}`, width: W, height: H }, [
      svgEl("line", { x1: PAD, x2: W - PAD, y1: H / 2, y2: H / 2, stroke: "#ccc" }),
      svgEl("line", { x1: W / 2, x2: W / 2, y1: PAD, y2: H - PAD, stroke: "#ccc" }),
      ...points,
    ]) as unknown as Node,
  ]);
}

export function mapsView(container: HTMLElement, ca: PerceptualMapDoc,
                         mcaDoc: PerceptualMapDoc): void {
  clear(container);
  container.append(
    el("h2", {}, ["Perceptual maps"]),
    el("div", { class: "maps-row" }, [
      scatter(ca, "co-occurrence CA", "ca-map"),
      scatter(mcaDoc, "MCA of binned categories", "mca-map"),
    ]));
}
