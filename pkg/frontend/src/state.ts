/**
 * Pure UI state and transitions. No DOM, no fetch — everything here is a
 * plain function from state to state, which is what the unit tests exercise.
 *
 * The shape mirrors the annotation workflow: pick a word, see its contexts,
 * pick a lemma, score its senses per inventory, apply to the still-ticked
 * occurrences. Senses start unset; an unset sense is simply absent from the
 * outgoing request (it is never defaulted to Different).
 */

import type {
  BulkReceipt,
  BulkRequest,
  ContextRow,
  FlagRow,
  LemmaSuggestion,
  SensePanels,
  SenseRow,
  SessionProgress,
  VersionConflict,
  WordRow,
} from "./api.js";
import { isCategoryName, scoreValue, type CategoryName } from "./categories.js";

export type Banner =
  | { kind: "offline" }
  | { kind: "conflict"; message: string; occurrences: string[] }
  | { kind: "flags"; flags: FlagRow[] }
  | { kind: "rejected"; message: string }
  | null;

export interface UiState {
  annotatorId: string;
  wordQuery: string;
  words: WordRow[];
  selectedWord: string | null;
  contexts: ContextRow[];
  /** occurrence key "sentence_id:position" -> ticked for the next apply */
  pending: Record<string, boolean>;
  suggestions: LemmaSuggestion[];
  selectedLemma: string | null;
  /** inventory id -> that inventory's senses for the selected lemma */
  panels: Record<string, SenseRow[]>;
  /** selection key "inventory/sense_id" -> chosen category */
  selections: Record<string, CategoryName>;
  /** occurrence key -> last version this client has seen */
  versions: Record<string, number>;
  banner: Banner;
  progress: SessionProgress | null;
}

export function occurrenceKey(sentenceId: string, position: number): string {
  return `${sentenceId}:${position}`;
}

export function selectionKey(inventoryId: string, senseId: string): string {
  return `${inventoryId}/${senseId}`;
}

export function initialState(annotatorId: string): UiState {
  return {
    annotatorId,
    wordQuery: "",
    words: [],
    selectedWord: null,
    contexts: [],
    pending: {},
    suggestions: [],
    selectedLemma: null,
    panels: {},
    selections: {},
    versions: {},
    banner: null,
    progress: null,
  };
}

export function receiveWords(state: UiState, query: string, words: WordRow[]): UiState {
  return { ...state, wordQuery: query, words };
}

/** Choosing a word resets everything downstream of it. */
export function selectWord(state: UiState, surface: string): UiState {
  return {
    ...state,
    selectedWord: surface,
    contexts: [],
    pending: {},
    suggestions: [],
    selectedLemma: null,
    panels: {},
    selections: {},
    banner: null,
  };
}

/** Contexts arrive with every occurrence ticked — apply-to-all is the norm. */
export function receiveContexts(state: UiState, contexts: ContextRow[]): UiState {
  const pending: Record<string, boolean> = {};
  for (const row of contexts) {
    for (const position of row.positions) {
      pending[occurrenceKey(row.sentence_id, position)] = true;
    }
  }
  return { ...state, contexts, pending };
}

export function toggleOccurrence(state: UiState, key: string): UiState {
  if (!(key in state.pending)) return state;
  return { ...state, pending: { ...state.pending, [key]: !state.pending[key] } };
}

export function receiveSuggestions(state: UiState, suggestions: LemmaSuggestion[]): UiState {
  return { ...state, suggestions };
}

export function selectLemma(state: UiState, lemmaId: string): UiState {
  return { ...state, selectedLemma: lemmaId, panels: {}, selections: {} };
}

export function receivePanels(state: UiState, payload: SensePanels): UiState {
  if (payload.lemma_id !== state.selectedLemma) return state; // stale response
  return { ...state, panels: payload.inventories };
}

/**
 * Set (or with null, clear) one sense's category. Unknown category names are
 * a programming error and throw rather than reaching the wire.
 */
export function setCategory(
  state: UiState,
  inventoryId: string,
  senseId: string,
  name: CategoryName | null,
): UiState {
  const key = selectionKey(inventoryId, senseId);
  if (name === null) {
    if (!(key in state.selections)) return state;
    const selections = { ...state.selections };
    delete selections[key];
    return { ...state, selections };
  }
  if (!isCategoryName(name)) {
    throw new TypeError(`unknown category ${JSON.stringify(name)}`);
  }
  return { ...state, selections: { ...state.selections, [key]: name } };
}

export function pendingOccurrences(state: UiState): string[] {
  return Object.keys(state.pending)
    .filter((key) => state.pending[key])
    .sort();
}

/** Apply is possible iff ≥1 occurrence is ticked and ≥1 category is chosen. */
export function canApply(state: UiState): boolean {
  return (
    state.selectedLemma !== null &&
    pendingOccurrences(state).length > 0 &&
    Object.keys(state.selections).length > 0
  );
}

function parseOccurrenceKey(key: string): { sentence_id: string; token_position: number } {
  const cut = key.lastIndexOf(":");
  return { sentence_id: key.slice(0, cut), token_position: Number(key.slice(cut + 1)) };
}

/**
 * One request per inventory that has at least one scored sense. Scores go out
 * as the category's numeric value; the expected versions are whatever this
 * client last saw (0 for never-seen occurrences), which is what lets the
 * service catch concurrent edits.
 */
export function bulkRequests(state: UiState): BulkRequest[] {
  if (!canApply(state) || state.selectedLemma === null) return [];
  const occurrences = pendingOccurrences(state);
  const expected: Record<string, number> = {};
  for (const key of occurrences) expected[key] = state.versions[key] ?? 0;

  const byInventory = new Map<string, Record<string, number>>();
  for (const [key, name] of Object.entries(state.selections)) {
    const cut = key.indexOf("/");
    const inventoryId = key.slice(0, cut);
    const senseId = key.slice(cut + 1);
    const scores = byInventory.get(inventoryId) ?? {};
    scores[senseId] = scoreValue(name);
    byInventory.set(inventoryId, scores);
  }

  return [...byInventory.entries()]
    .sort(([a], [b]) => (a < b ? -1 : 1))
    .map(([inventoryId, scores]) => ({
      annotator_id: state.annotatorId,
      inventory_id: inventoryId,
      lemma_id: state.selectedLemma as string,
      scores,
      occurrences: occurrences.map(parseOccurrenceKey),
      expected_versions: { ...expected },
    }));
}

/**
 * All requests landed. Versions advance, selections clear (the judgement is
 * recorded), flags returned by the service surface as a banner so the
 * annotator sees contradictions immediately. Only the last receipt's flags
 * matter: each receipt's advisory flags describe the full occurrence state at
 * that moment, so earlier receipts in a multi-inventory apply reflect a
 * half-applied state (e.g. "nothing correct yet" in an inventory whose
 * request simply hadn't been sent yet).
 */
export function applySucceeded(state: UiState, receipts: BulkReceipt[]): UiState {
  const versions = { ...state.versions };
  let progress = state.progress;
  for (const receipt of receipts) {
    Object.assign(versions, receipt.versions);
    if (receipt.session !== null) progress = receipt.session;
  }
  const flags = receipts.length > 0 ? (receipts[receipts.length - 1]?.flags ?? []) : [];
  return {
    ...state,
    versions,
    selections: {},
    progress,
    banner: flags.length > 0 ? { kind: "flags", flags } : null,
  };
}

/**
 * The service refused on stale versions. Selections are preserved — the
 * annotator's unsent work is never dropped — and the recorded versions jump
 * to the server's current ones so a retry goes through.
 */
export function applyConflicted(
  state: UiState,
  message: string,
  conflicts: Record<string, VersionConflict>,
): UiState {
  const versions = { ...state.versions };
  for (const [key, conflict] of Object.entries(conflicts)) {
    versions[key] = conflict.current;
  }
  return {
    ...state,
    versions,
    banner: { kind: "conflict", message, occurrences: Object.keys(conflicts).sort() },
  };
}

export function applyRejected(state: UiState, message: string): UiState {
  return { ...state, banner: { kind: "rejected", message } };
}

/** Transport failure: keep everything, show the offline banner. */
export function wentOffline(state: UiState): UiState {
  return { ...state, banner: { kind: "offline" } };
}

export function dismissBanner(state: UiState): UiState {
  return { ...state, banner: null };
}

/** Flags from the current banner that concern one inventory's panel. */
export function flagsForInventory(state: UiState, inventoryId: string): FlagRow[] {
  if (state.banner?.kind !== "flags") return [];
  return state.banner.flags.filter((flag) => flag.inventory_id === inventoryId);
}
