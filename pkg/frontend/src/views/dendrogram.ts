/** Dendrogram with a draggable cut line and the induced merge sets.
 *
 * Dragging the line (or releasing it) POSTs the new height to the service
 * and re-renders whatever merge sets come back; the view never partitions
 * leaves itself. Clicking a set opens the merge grid for veto/naming and
 * feeds the radar comparison.
 */

import { DendrogramDoc, ForgeClient, Persona } from "../api.js";
import { clear, el, fmt, svgEl } from "../dom.js";
import { Store, clamp01 } from "../state.js";

const W = 720;
const H = 300;
const PAD = { left: 36, top: 10, bottom: 34 };

interface Layout {
  /** leaf id -> x pixel */
  leafX: Map<string, number>;
  /** node index -> [x, y] pixel */
  nodePos: Map<number, [number, number]>;
}

function layout(doc: DendrogramDoc): Layout {
  const n = doc.leaves.length;
  const children = new Map<number, [number, number]>();
  doc.merges.forEach((m, i) => children.set(n + i, [m.left, m.right]));
  const root = n + doc.merges.length - 1;

  const order: number[] = [];
  const walk = (node: number): void => {
    const kids = children.get(node);
    if (!kids) { order.push(node); return; }
    walk(kids[0]);
    walk(kids[1]);
  };
  walk(root);

  const slot = new Map(order.map((leaf, i) => [leaf, i]));
  const innerW = W - PAD.left - 10;
  const xOf = (i: number): number => PAD.left + (i + 0.5) * (innerW / order.length);
  const yOf = (h: number): number => H - PAD.bottom - h * (H - PAD.top - PAD.bottom);

  const nodePos = new Map<number, [number, number]>();
  order.forEach((leaf) => nodePos.set(leaf, [xOf(slot.get(leaf)!), yOf(0)]));
  doc.merges.forEach((m, i) => {
    const [lx] = nodePos.get(m.left)!;
    const [rx] = nodePos.get(m.right)!;
    nodePos.set(n + i, [(lx + rx) / 2, yOf(m.height)]);
  });
  const leafX = new Map(doc.leaves.map((id, i) => [id, nodePos.get(i)![0]]));
  return { leafX, nodePos };
}

const SET_COLOURS = ["#4477aa", "#ee6677", "#228833", "#ccbb44",
                     "#66ccee", "#aa3377", "#bbbbbb", "#555555"];

export function dendrogramView(store: Store, client: ForgeClient,
                               container: HTMLElement, doc: DendrogramDoc,
                               onSetChosen: (set: string[]) => void): void {
  clear(container);
  const { leafX, nodePos } = layout(doc);
  const n = doc.leaves.length;
  const yOf = (h: number): number => H - PAD.bottom - h * (H - PAD.top - PAD.bottom);

  const links: SVGElement[] = [];
  doc.merges.forEach((m, i) => {
    const [lx, ly] = nodePos.get(m.left)!;
    const [rx, ry] = nodePos.get(m.right)!;
    const y = nodePos.get(n + i)![1];
    links.push(svgEl("path", {
      d: `M ${lx} ${ly} V ${y} H ${rx} V ${ry}`,
      fill: "none", stroke: "#444", "stroke-width": 1,
    }));
  });

  const setOf = new Map<string, number>();
  store.state.cutSets.forEach((set, i) => set.forEach((id) => setOf.set(id, i)));
  const labels = doc.leaves.map((id) => {
    const x = leafX.get(id)!;
    const colour = SET_COLOURS[(setOf.get(id) ?? 0) % SET_COLOURS.length];
    return svgEl("text", {
      x, y: H - PAD.bottom + 12, "text-anchor": "end", class: "leaf-label",
      transform: `rotate(-55 ${x} ${H - PAD.bottom + 12})`,
      fill: store.state.cutSets.length ? colour : "#222", "font-size": 10,
    }, [document.createTextNode(id)]);
  });

  const cutY = yOf(store.state.cutHeight);
  const cutLine = svgEl("line", {
    id: "cut-line", x1: PAD.left - 22, x2: W - 4, y1: cutY, y2: cutY,
    stroke: "#cc3311", "stroke-width": 2, "stroke-dasharray": "6 3", cursor: "ns-resize",
  });
  const cutLabel = svgEl("text", {
    id: "cut-label", x: 2, y: cutY + 4, "font-size": 11, fill: "#cc3311",
  }, [document.createTextNode(fmt(store.state.cutHeight, 2))]);

  const axis = [0, 0.25, 0.5, 0.75, 1].map((h) => svgEl("text", {
    x: 2, y: yOf(h) + 3, "font-size": 9, fill: "#888",
  }, [document.createTextNode(h.toFixed(2))]));

  const svg = svgEl("svg", {
    id: "dendrogram", viewBox: `0 0 ${W} ${H}`, width: W, height: H,
  }, [...axis, ...links, ...labels, cutLine, cutLabel]);

  // drag: update the line locally while moving, ask the service on release
  let dragging = false;
  const heightAt = (clientY: number): number => {
    const rect = (svg as SVGGraphicsElement).getBoundingClientRect();
    const y = clientY - rect.top;
    return clamp01((H - PAD.bottom - y) / (H - PAD.top - PAD.bottom));
  };
  cutLine.addEventListener("pointerdown", () => { dragging = true; });
  svg.addEventListener("pointermove", (ev) => {
    if (!dragging) return;
    const h = heightAt((ev as PointerEvent).clientY);
    store.setCutHeight(h);
    const y = yOf(h);
    cutLine.setAttribute("y1", String(y));
    cutLine.setAttribute("y2", String(y));
    cutLabel.setAttribute("y", String(y + 4));
    cutLabel.textContent = fmt(h, 2);
  });
  const release = async (): Promise<void> => {
    if (!dragging) return;
    dragging = false;
    await requestCut(store, client, store.state.cutHeight);
    dendrogramView(store, client, container, doc, onSetChosen);
  };
  svg.addEventListener("pointerup", () => { void release(); });
  svg.addEventListener("pointerleave", () => { void release(); });

  const setList = el("ol", { id: "merge-sets" },
    store.state.cutSets.map((set, i) => {
      const item = el("li", { class: "merge-set", "data-set": String(i) }, [
        el("span", { class: "swatch", style: `background:${SET_COLOURS[i % SET_COLOURS.length]}` }),
        set.join(", "),
      ]);
      item.addEventListener("click", () => onSetChosen(set));
      return item;
    }));

  container.append(
    el("h2", {}, ["Dendrogram"]),
    svg,
    el("p", { class: "hint" },
       [`cut at ${fmt(store.state.cutHeight, 2)} -> ${store.state.cutSets.length} sets; ` +
        "drag the red line, click a set to inspect it"]),
    setList);
}

export async function requestCut(store: Store, client: ForgeClient,
                                 height: number): Promise<void> {
  const sid = store.state.sessionId;
  if (!sid) return;
  store.applyCut(await client.cut(sid, clamp01(height)));
}

/** Merge grid for one set: service-computed stats, veto boxes, naming. */
export function mergeGrid(store: Store, client: ForgeClient, container: HTMLElement,
                          preview: Persona,
                          onStored: (persona: Persona) => void): void {
  clear(container);
  const rows = preview.dims.map((d) => {
    const box = el("input", {
      type: "checkbox", class: "veto", "data-dim": d.dim,
    }) as HTMLInputElement;
    box.checked = store.state.pendingVetoes.includes(d.dim);
    box.addEventListener("change", () => store.toggleVeto(d.dim));
    return el("tr", d.conflicting ? { class: "conflict" } : {}, [
      el("td", {}, [d.dim]),
      el("td", { class: "mean" }, [fmt(d.mean)]),
      el("td", { class: "std" }, [fmt(d.std)]),
      el("td", { class: "support" }, [String(d.support)]),
      el("td", {}, [d.conflicting ? "CONFLICT" : ""]),
      el("td", {}, [box]),
    ]);
  });
  const nameInput = el("input", { id: "persona-name", placeholder: "persona name" }) as HTMLInputElement;
  nameInput.value = store.state.nameDraft;
  nameInput.addEventListener("input", () => store.update({ nameDraft: nameInput.value }));
  const saveButton = el("button", { id: "save-persona" }, ["save proto-persona"]);
  const status = el("span", { class: "status" });
  saveButton.addEventListener("click", async () => {
    const sid = store.state.sessionId;
    if (!sid) return;
    try {
      const persona = await client.createProto(
        sid, preview.sources, store.state.pendingVetoes, nameInput.value);
      store.update({ personas: [...store.state.personas, persona], pendingVetoes: [] });
      status.textContent = `saved ${persona.name}`;
      onStored(persona);
    } catch (err) {
      status.textContent = String(err);   // keep local state for another try
    }
  });

  container.append(
    el("h3", {}, [`Merge of ${preview.sources.join(" + ")}`]),
    el("p", { class: "hint" }, [`members ${preview.members.join(", ")}`]),
    el("table", { id: "merge-grid" }, [
      el("tr", {}, ["dim", "mean", "std", "support", "", "veto"].map((h) => el("th", {}, [h]))),
      ...rows,
    ]),
    el("div", { class: "row" }, [nameInput, saveButton, status]));
}
