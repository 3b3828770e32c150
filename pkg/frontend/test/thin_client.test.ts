/** Acceptance: the workbench computes nothing itself. Every displayed r,
 * m, quality, mean, and coordinate figure is traced back to a field of an
 * intercepted service response; unmocked requests fail the test.
 */

import { beforeEach, describe, expect, it } from "vitest";

import type { Persona, PerceptualMapDoc } from "../src/api.js";
import { ForgeClient } from "../src/api.js";
import { Store } from "../src/state.js";
import { mergeGrid } from "../src/views/dendrogram.js";
import { mapsView } from "../src/views/maps.js";
import { clusterGrid, paramsPanel } from "../src/views/params.js";
import { radarView } from "../src/views/radar.js";
import { container, mockFetch } from "./helpers.js";

const PREVIEW = { r: 3, m: 11091, cap: 10000000, over_cap: false, beta_warning: false };

const CLUSTERS = [
  { id: "A45", members: ["3", "8"], subspace: ["d1", "d4"],
    means: { d1: 0.912, d4: 0.077 }, quality: 43.75 },
  { id: "B45", members: ["2", "5"], subspace: ["d4"],
    means: { d4: 0.654 }, quality: 4.4444 },
];

const PERSONA: Persona = {
  name: "", sources: ["A45", "B45"], members: ["2", "3", "5", "8"],
  dims: [
    { dim: "d4", mean: 0.3655, std: 0.408, support: 2, conflicting: true },
    { dim: "d1", mean: 0.912, std: 0, support: 1, conflicting: false },
  ],
};

const MAP: PerceptualMapDoc = {
  rows: [{ id: "3", coords: [0.41, -0.2] }, { id: "8", coords: [-0.35, 0.11] }],
  cols: [], eigenvalues: [0.5, 0.25], inertia_pct: [62.5, 37.5],
  total_inertia: 0.8, warnings: [],
};

describe("thin-client contract", () => {
  beforeEach(() => { document.body.innerHTML = ""; });   // ids must stay unique

  it("r and m in the parameter panel come from /params/preview", async () => {
    const { fetcher, calls } = mockFetch({ "GET /params/preview": () => PREVIEW });
    const store = new Store();
    store.update({ dimsCount: 47, sessionId: "s1" });
    const panel = paramsPanel(store, new ForgeClient("", fetcher), () => {});
    document.body.append(panel.root);
    await panel.refreshPreview();
    const text = panel.root.querySelector("#params-preview")!.textContent!;
    expect(text).toBe(`r = ${PREVIEW.r}, m = ${PREVIEW.m}`);
    expect(calls.filter((c) => c.path.startsWith("/params/preview")).length).toBe(1);
  });

  it("beta above 0.5 surfaces the service's approximation warning", async () => {
    const { fetcher } = mockFetch({
      "GET /params/preview": () => ({ ...PREVIEW, beta_warning: true }),
    });
    const store = new Store();
    store.update({ dimsCount: 47, sessionId: "s1" });
    const panel = paramsPanel(store, new ForgeClient("", fetcher), () => {});
    document.body.append(panel.root);
    await panel.refreshPreview();
    expect(panel.root.querySelector("#params-warning")!.textContent)
      .toContain("beta above 0.5");
  });

  it("invalid alpha never reaches the network", async () => {
    const { fetcher, calls } = mockFetch({ "GET /params/preview": () => PREVIEW });
    const store = new Store();
    store.update({ dimsCount: 47, sessionId: "s1" });
    const panel = paramsPanel(store, new ForgeClient("", fetcher), () => {});
    document.body.append(panel.root);
    (panel.root.querySelector("#alpha") as HTMLInputElement).value = "0";
    (panel.root.querySelector("#run") as HTMLButtonElement).click();
    await new Promise((r) => setTimeout(r, 0));
    expect(calls.length).toBe(0);
    expect(panel.root.querySelector("#params-error")!.textContent).toContain("alpha");
  });

  it("every mean and quality in the cluster grid is a response field", () => {
    const store = new Store();
    store.update({ clusters: CLUSTERS });
    const box = container();
    clusterGrid(store, box);
    const meanCells = [...box.querySelectorAll("td.mean")].map((td) => td.textContent);
    const payloadMeans = CLUSTERS.flatMap((c) => Object.values(c.means))
      .map((v) => v.toFixed(3));
    expect(meanCells.sort()).toEqual(payloadMeans.sort());
    const qualities = [...box.querySelectorAll("th[title]")]
      .map((th) => th.getAttribute("title"));
    expect(qualities).toEqual(CLUSTERS.map((c) => `quality ${c.quality}`));
    // off-subspace cells are dimmed NA, never numbers
    expect([...box.querySelectorAll("td.na")].every((td) => td.textContent === "NA"))
      .toBe(true);
  });

  it("merge grid shows exactly the service's mean/std/support and flags", () => {
    const { fetcher } = mockFetch({});
    const store = new Store();
    store.update({ sessionId: "s1" });
    const box = container();
    mergeGrid(store, new ForgeClient("", fetcher), box, PERSONA, () => {});
    const rows = [...box.querySelectorAll("#merge-grid tr")].slice(1);
    PERSONA.dims.forEach((d, i) => {
      const cells = [...rows[i].querySelectorAll("td")].map((td) => td.textContent);
      expect(cells[1]).toBe(d.mean.toFixed(3));
      expect(cells[2]).toBe(d.std.toFixed(3));
      expect(cells[3]).toBe(String(d.support));
      expect(cells[4]).toBe(d.conflicting ? "CONFLICT" : "");
    });
  });

  it("vetoing a conflicting dim updates state without recomputation", () => {
    const { fetcher, calls } = mockFetch({});
    const store = new Store();
    store.update({ sessionId: "s1" });
    const box = container();
    mergeGrid(store, new ForgeClient("", fetcher), box, PERSONA, () => {});
    const veto = box.querySelector('input.veto[data-dim="d4"]') as HTMLInputElement;
    veto.click();
    expect(store.state.pendingVetoes).toEqual(["d4"]);
    expect(calls.length).toBe(0);   // veto is local state until save POSTs it
  });

  it("radar polygons use service values verbatim and grey missing axes", () => {
    const doc = {
      axes: [
        { dim: "d1", label: "d1", rim: "high", centre: "low" },
        { dim: "d4", label: "d4", rim: "high", centre: "low" },
      ],
      series: [
        { id: "A45", values: [0.912, 0.077], greyed: [false, false] },
        { id: "B45", values: [null, 0.654], greyed: [true, false] },
      ],
    };
    const box = container();
    radarView(box, doc);
    const polys = [...box.querySelectorAll("polygon.radar-series")];
    expect(polys.length).toBe(2);
    // the series with a null value draws one point fewer
    expect(polys[0].getAttribute("points")!.split(" ").length).toBe(2);
    expect(polys[1].getAttribute("points")!.split(" ").length).toBe(1);
    const greyed = [...box.querySelectorAll("text.axis-greyed")].map((t) => t.textContent);
    expect(greyed).toEqual(["d1"]);
  });

  it("map captions carry the service's inertia percentages", () => {
    const box = container();
    mapsView(box, MAP, MAP);
    const captions = [...box.querySelectorAll("figcaption")].map((c) => c.textContent);
    for (const caption of captions) {
      expect(caption).toContain("62.5%");
      expect(caption).toContain("37.5%");
    }
    expect(box.querySelectorAll("#ca-map circle.map-point").length)
      .toBe(MAP.rows.length);
  });
});
