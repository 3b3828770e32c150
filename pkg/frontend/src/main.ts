/** Workbench wiring: session bootstrap, run polling, view refresh. */

import { ForgeClient } from "./api.js";
import { el } from "./dom.js";
import { Store } from "./state.js";
import { dendrogramView, mergeGrid, requestCut } from "./views/dendrogram.js";
import { mapsView } from "./views/maps.js";
import { clusterGrid, paramsPanel } from "./views/params.js";
import { radarView } from "./views/radar.js";

const POLL_MS = 400;

export function bootWorkbench(rootEl: HTMLElement,
                              client = new ForgeClient("")): Store {
  const store = new Store();

  const uploadBox = el("textarea", {
    id: "csv-input", rows: "6", cols: "80",
    placeholder: "paste a VAS score CSV (header: subject,d1,d2,...)",
  }) as HTMLTextAreaElement;
  const uploadButton = el("button", { id: "upload" }, ["create session"]);
  const sessionLabel = el("span", { id: "session-label" });
  const clustersBox = el("section", { id: "clusters" });
  const dendBox = el("section", { id: "dendrogram-box" });
  const mergeBox = el("section", { id: "merge-box" });
  const radarBox = el("section", { id: "radar-box" });
  const mapsBox = el("section", { id: "maps-box" });
  const statusLine = el("p", { id: "status", class: "hint" });

  const panel = paramsPanel(store, client, (runId) => { void poll(runId); });

  rootEl.append(
    el("h1", {}, ["personaforge workbench"]),
    el("section", { id: "upload-box" }, [uploadBox, uploadButton, sessionLabel]),
    panel.root, statusLine, clustersBox, dendBox, mergeBox, radarBox, mapsBox);

  uploadButton.addEventListener("click", async () => {
    try {
      const info = await client.uploadDataset(uploadBox.value);
      const session = await client.createSession(info.id);
      store.update({ sessionId: session.id, datasetId: info.id,
                     dimsCount: info.dimensions });
      sessionLabel.textContent =
        `session ${session.id}: ${info.subjects} subjects x ${info.dimensions} dimensions`;
      await panel.refreshPreview();
    } catch (err) {
      sessionLabel.textContent = String(err);
    }
  });

  async function poll(runId: string): Promise<void> {
    const sid = store.state.sessionId;
    if (!sid) return;
    statusLine.textContent = `run ${runId}: working...`;
    const status = await client.runStatus(sid, runId);
    if (status.status === "queued" || status.status === "running") {
      setTimeout(() => { void poll(runId); }, POLL_MS);
      return;
    }
    store.update({ runInFlight: null });
    if (status.status === "error") {
      statusLine.textContent = `run ${runId} failed: ${status.error}`;
      return;
    }
    statusLine.textContent =
      `run ${runId} done: ${status.result!.clusters.length} clusters`;
    await refreshAnalysis();
  }

  async function refreshAnalysis(): Promise<void> {
    const sid = store.state.sessionId!;
    const { clusters } = await client.clusters(sid);
    store.update({ clusters });
    clusterGrid(store, clustersBox);
    await client.similarity(sid);
    const dend = await client.dendrogram(sid);
    await requestCut(store, client, store.state.cutHeight);
    dendrogramView(store, client, dendBox, dend, (set) => { void inspectSet(set); });
    const [ca, mca] = await Promise.all([client.ca(sid), client.mca(sid)]);
    mapsView(mapsBox, ca, mca);
  }

  async function inspectSet(set: string[]): Promise<void> {
    const sid = store.state.sessionId!;
    store.update({ pendingVetoes: [], nameDraft: "" });
    const preview = await client.previewProto(sid, set);
    mergeGrid(store, client, mergeBox, preview, () => { /* keep grid */ });
    if (set.length >= 2) {
      store.update({ radarSelection: [set[0], set[1]] });
      radarView(radarBox, await client.radar(sid, set[0], set[1]));
    } else if (set.length === 1) {
      store.update({ radarSelection: [set[0]] });
      radarView(radarBox, await client.radar(sid, set[0], set[0]));
    }
  }

  return store;
}

declare global {
  interface Window { forgeStore?: Store }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  window.forgeStore = bootWorkbench(document.getElementById("app")!);
}
