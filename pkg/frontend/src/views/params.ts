/** Parameter panel: w / alpha / beta / seed with a live r and m preview.
 *
 * The r and m figures come from the service's /params/preview endpoint on
 * every change, never from local arithmetic. Submitting starts an
 * asynchronous run; 422 responses surface inline without clearing the
 * form.
 */

import { ApiError, ForgeClient } from "../api.js";
import { clear, el } from "../dom.js";
import { Store } from "../state.js";

export interface ParamsPanel {
  root: HTMLElement;
  refreshPreview: () => Promise<void>;
}

export function paramsPanel(store: Store, client: ForgeClient,
                            onRunSubmitted: (runId: string) => void): ParamsPanel {
  const wInput = el("input", { id: "w", value: String(store.state.params.w), size: "6" });
  const alphaInput = el("input", { id: "alpha", value: String(store.state.params.alpha), size: "6" });
  const betaInput = el("input", {
    id: "beta", type: "range", min: "0.05", max: "0.95", step: "0.05",
    value: String(store.state.params.beta),
  });
  const betaLabel = el("span", { id: "beta-value" }, [String(store.state.params.beta)]);
  const seedInput = el("input", { id: "seed", value: String(store.state.params.seed), size: "8" });
  const preview = el("span", { id: "params-preview", class: "preview" });
  const warning = el("div", { id: "params-warning", class: "warning" });
  const errorBox = el("div", { id: "params-error", class: "error" });
  const runButton = el("button", { id: "run" }, ["run clustering"]) as HTMLButtonElement;

  const root = el("section", { id: "params-panel" }, [
    el("h2", {}, ["Parameters"]),
    el("div", { class: "row" }, [el("label", { for: "w" }, ["w "]), wInput]),
    el("div", { class: "row" }, [el("label", { for: "alpha" }, ["alpha "]), alphaInput]),
    el("div", { class: "row" }, [el("label", { for: "beta" }, ["beta "]), betaInput, betaLabel]),
    el("div", { class: "row" }, [el("label", { for: "seed" }, ["seed "]), seedInput]),
    el("div", { class: "row" }, [preview]),
    warning, errorBox,
    el("div", { class: "row" }, [runButton]),
  ]);

  function readParams(): { w: number | "auto"; alpha: number; beta: number; seed: number } | null {
    const beta = Number(betaInput.value);
    const alpha = Number(alphaInput.value);
    const seed = Number(seedInput.value);
    const wRaw = wInput.value.trim();
    const w = wRaw === "auto" ? "auto" as const : Number(wRaw);
    errorBox.textContent = "";
    if (!(alpha > 0 && alpha <= 1)) {
      errorBox.textContent = "alpha must be in (0, 1]";
      return null;
    }
    if (!(beta > 0 && beta < 1)) {
      errorBox.textContent = "beta must be in (0, 1)";
      return null;
    }
    if (w !== "auto" && !(typeof w === "number" && w > 0)) {
      errorBox.textContent = "w must be a positive number or 'auto'";
      return null;
    }
    if (!Number.isInteger(seed)) {
      errorBox.textContent = "seed must be an integer";
      return null;
    }
    return { w, alpha, beta, seed };
  }

  async function refreshPreview(): Promise<void> {
    betaLabel.textContent = betaInput.value;
    const params = readParams();
    if (!params || !store.state.dimsCount) return;
    const doc = await client.paramsPreview(store.state.dimsCount, params.beta, params.alpha);
    preview.textContent = doc.over_cap
      ? `r = ${doc.r}, m over the ${doc.cap} trial cap`
      : `r = ${doc.r}, m = ${doc.m}`;
    warning.textContent = doc.beta_warning
      ? "beta above 0.5: the approximation guarantee no longer holds; rerun with fresh seeds to check stability"
      : "";
  }

  betaInput.addEventListener("input", () => { void refreshPreview(); });
  alphaInput.addEventListener("input", () => { void refreshPreview(); });

  runButton.addEventListener("click", async () => {
    const params = readParams();
    const sid = store.state.sessionId;
    if (!params || !sid) return;
    store.update({ params });
    runButton.disabled = true;
    try {
      const { run } = await client.startRun(sid, params);
      store.update({ runInFlight: run, error: null });
      onRunSubmitted(run);
    } catch (err) {
      if (err instanceof ApiError) {
        const payload = err.payload as { error?: { message?: string } };
        errorBox.textContent = payload.error?.message ?? `service error ${err.status}`;
      } else {
        errorBox.textContent = String(err);
      }
      runButton.disabled = false;
    }
  });

  store.subscribe((state) => {
    runButton.disabled = state.runInFlight !== null;
  });

  return { root, refreshPreview };
}

/** Cluster grid in the dimensions-as-rows table layout; NA cells dimmed. */
export function clusterGrid(store: Store, container: HTMLElement): void {
  clear(container);
  const clusters = store.state.clusters;
  if (!clusters.length) {
    container.append(el("p", { class: "hint" }, ["no clusters yet; run the search"]));
    return;
  }
  const dims = Array.from(new Set(clusters.flatMap((c) => c.subspace)))
    .sort((a, b) => Number(a.slice(1)) - Number(b.slice(1)));
  const head = el("tr", {}, [
    el("th", {}, ["dim"]),
    ...clusters.map((c) => el("th", { title: `quality ${c.quality}` }, [c.id])),
  ]);
  const memberRow = el("tr", {}, [
    el("th", {}, ["members"]),
    ...clusters.map((c) => el("td", { class: "members" }, [c.members.join(".")])),
  ]);
  const body = dims.map((dim) => el("tr", {}, [
    el("th", {}, [dim]),
    ...clusters.map((c) => dim in c.means
      ? el("td", { class: "mean" }, [c.means[dim].toFixed(3)])
      : el("td", { class: "na" }, ["NA"])),
  ]));
  container.append(el("table", { id: "cluster-grid" }, [head, memberRow, ...body]));
}
