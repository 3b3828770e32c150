/** Workbench state: a tiny observable store with the UI invariants. */

import type { Cluster, CutResult, Persona, RunParams } from "./api.js";

export interface WorkbenchState {
  sessionId: string | null;
  datasetId: string | null;
  dimsCount: number;
  params: RunParams;
  runInFlight: string | null;
  clusters: Cluster[];
  cutHeight: number;
  cutSets: string[][];
  /** exactly 1 or 2 ids as the radar comparison selection */
  radarSelection: string[];
  pendingVetoes: string[];
  nameDraft: string;
  personas: Persona[];
  error: string | null;
}

export function initialState(): WorkbenchState {
  return {
    sessionId: null,
    datasetId: null,
    dimsCount: 0,
    params: { w: "auto", alpha: 0.1, beta: 0.45, seed: 7 },
    runInFlight: null,
    clusters: [],
    cutHeight: 0.5,
    cutSets: [],
    radarSelection: [],
    pendingVetoes: [],
    nameDraft: "",
    personas: [],
    error: null,
  };
}

export const clamp01 = (x: number): number => Math.min(1, Math.max(0, x));

type Listener = (state: WorkbenchState) => void;

export class Store {
  private listeners: Listener[] = [];

  constructor(public state: WorkbenchState = initialState()) {}

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => { this.listeners = this.listeners.filter((l) => l !== fn); };
  }

  update(patch: Partial<WorkbenchState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  /** Cut height is a slider position; it never leaves [0, 1]. */
  setCutHeight(height: number): void {
    this.update({ cutHeight: clamp01(height) });
  }

  applyCut(result: CutResult): void {
    this.update({ cutHeight: clamp01(result.height), cutSets: result.sets });
  }

  /** Keep the most recent 1-2 picks; clicking a selected id unselects it. */
  toggleRadarSelection(id: string): void {
    const current = this.state.radarSelection;
    const next = current.includes(id)
      ? current.filter((x) => x !== id)
      : [...current.slice(-1), id];
    this.update({ radarSelection: next });
  }

  toggleVeto(dim: string): void {
    const current = this.state.pendingVetoes;
    const next = current.includes(dim)
      ? current.filter((d) => d !== dim)
      : [...current, dim];
    this.update({ pendingVetoes: next });
  }
}
