/** Radar comparison of two clusters or proto-personas.
 *
 * One axis per dimension in the union of the two subspaces; the rim is
 * the dimension's right extreme, the centre the opposite one. An axis
 * label greys out for a side that does not cluster on it, and that side's
 * polygon simply skips the axis.
 */

import { RadarDoc } from "../api.js";
import { clear, el, svgEl } from "../dom.js";

const SIZE = 360;
const R = 130;
const SERIES_COLOURS = ["#4477aa", "#ee6677"];

export function radarView(container: HTMLElement, doc: RadarDoc): void {
  clear(container);
  const cx = SIZE / 2;
  const cy = SIZE / 2;
  const k = doc.axes.length;
  const angle = (i: number): number => (2 * Math.PI * i) / k - Math.PI / 2;
  const pt = (i: number, value: number): [number, number] =>
    [cx + R * value * Math.cos(angle(i)), cy + R * value * Math.sin(angle(i))];

  const rings = [0.33, 0.67, 1].map((v) => svgEl("circle", {
    cx, cy, r: R * v, fill: "none", stroke: "#ddd",
  }));
  const spokes = doc.axes.map((_, i) => {
    const [x, y] = pt(i, 1);
    return svgEl("line", { x1: cx, y1: cy, x2: x, y2: y, stroke: "#eee" });
  });

  const greyedEverywhere = (i: number): boolean[] =>
    doc.series.map((s) => s.greyed[i]);
  const labels = doc.axes.map((ax, i) => {
    const [x, y] = pt(i, 1.14);
    const grey = greyedEverywhere(i).some(Boolean);
    return svgEl("text", {
      x, y, "text-anchor": "middle", "font-size": 9,
      class: grey ? "axis-greyed" : "axis-label",
      fill: grey ? "#b0b0b0" : "#222",
    }, [document.createTextNode(ax.dim)]);
  });

  const polygons = doc.series.map((series, s) => {
    const pts = series.values
      .map((v, i) => (v === null ? null : pt(i, v)))
      .filter((p): p is [number, number] => p !== null);
    return svgEl("polygon", {
      class: "radar-series", "data-series": series.id,
      points: pts.map(([x, y]) => `${x},${y}`).join(" "),
      fill: SERIES_COLOURS[s % 2] + "33", stroke: SERIES_COLOURS[s % 2], "stroke-width": 1.5,
    });
  });

  const legend = el("p", { class: "legend" }, doc.series.flatMap((s, i) => [
    el("span", { class: "swatch", style: `background:${SERIES_COLOURS[i % 2]}` }),
    el("span", { class: "series-id" }, [s.id + "  "]),
  ]));

  container.append(
    el("h3", {}, ["Radar comparison"]),
    svgEl("svg", { id: "radar", viewBox: `0 0 ${SIZE} ${SIZE}`, width: SIZE, height: SIZE },
          [...rings, ...spokes, ...labels, ...polygons]),
    legend);
}
