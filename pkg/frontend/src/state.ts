/**
 * Explorer state: a single observable value plus pure helpers.
 *
 * The rendered differential is always the most recent service response;
 * findings mirror what has been committed (or optimistically submitted and
 * rolled back on failure). Nothing in here computes a score.
 */

import type {
  CodexMeta,
  Differential,
  DifferentialEntry,
  Explanation,
  FeatureMeta,
  Proposal,
  Status,
} from './types.js';

export const CHART_LIMIT = 10;

export interface WhatIfPreview {
  feature: string;
  status: Status;
  differential: Differential;
}

export interface Notice {
  id: number;
  message: string;
}

export interface UiState {
  sessionId: string | null;
  codex: CodexMeta | null;
  findings: Record<string, Status>;
  differential: Differential | null;
  whatIf: WhatIfPreview | null;
  trace: Explanation | null;
  proposals: Proposal[];
  notices: Notice[];
  search: string;
  showAll: boolean;
  busy: boolean;
}

export function initialState(): UiState {
  return {
    sessionId: null,
    codex: null,
    findings: {},
    differential: null,
    whatIf: null,
    trace: null,
    proposals: [],
    notices: [],
    search: '',
    showAll: false,
    busy: false,
  };
}

export type Listener = (state: UiState) => void;

export class Store {
  private value: UiState;
  private listeners = new Set<Listener>();
  private noticeCounter = 0;

  constructor(value: UiState = initialState()) {
    this.value = value;
  }

  get state(): UiState {
    return this.value;
  }

  update(patch: Partial<UiState>): void {
    this.value = { ...this.value, ...patch };
    for (const listener of this.listeners) {
      listener(this.value);
    }
  }

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  pushNotice(message: string): void {
    this.noticeCounter += 1;
    this.update({ notices: [...this.value.notices, { id: this.noticeCounter, message }] });
  }

  dismissNotice(id: number): void {
    this.update({ notices: this.value.notices.filter((n) => n.id !== id) });
  }
}

/** Findings map with one feature set (or cleared when status is unknown). */
export function withFinding(
  findings: Record<string, Status>,
  feature: string,
  status: Status,
): Record<string, Status> {
  const next = { ...findings };
  if (status === 'unknown') {
    delete next[feature];
  } else {
    next[feature] = status;
  }
  return next;
}

export function statusOf(findings: Record<string, Status>, feature: string): Status {
  return findings[feature] ?? 'unknown';
}

/** Case-insensitive substring filter over id, name, and synonyms. */
export function filterFeatures(features: FeatureMeta[], search: string): FeatureMeta[] {
  const needle = search.trim().toLowerCase();
  if (!needle) {
    return features;
  }
  return features.filter(
    (f) =>
      f.id.toLowerCase().includes(needle) ||
      f.name.toLowerCase().includes(needle) ||
      f.synonyms.some((s) => s.toLowerCase().includes(needle)),
  );
}

/**
 * Entries to chart, in the service's own order (already confidence-sorted),
 * truncated to the top slice unless "show all" is active.
 */
export function visibleEntries(
  differential: Differential | null,
  showAll: boolean,
  limit: number = CHART_LIMIT,
): DifferentialEntry[] {
  if (!differential) {
    return [];
  }
  return showAll ? differential.entries : differential.entries.slice(0, limit);
}

/** Ghost entry lookup for a what-if overlay, keyed by hypothesis id. */
export function ghostByHypothesis(preview: WhatIfPreview | null): Map<string, DifferentialEntry> {
  const map = new Map<string, DifferentialEntry>();
  if (preview) {
    for (const entry of preview.differential.entries) {
      map.set(entry.hypothesis, entry);
    }
  }
  return map;
}
