/**
 * DOM shell around the pure state module. One full redraw per transition —
 * at this scale (one word's contexts, two sense panels) rebuilding is cheaper
 * than bookkeeping, and it keeps render a plain function of state.
 *
 * Layout, right to left: word list | contexts of the chosen word | lemma box
 * and per-inventory sense panels. The apply button in the footer posts one
 * bulk request per inventory that has scored senses.
 */

import {
  ServiceClient,
  ServiceUnreachable,
  type BulkReceipt,
  type ContextRow,
  type FlagRow,
  type SenseRow,
} from "./api.js";
import { CATEGORIES, type CategoryName } from "./categories.js";
import {
  applyConflicted,
  applyRejected,
  applySucceeded,
  bulkRequests,
  canApply,
  dismissBanner,
  flagsForInventory,
  initialState,
  occurrenceKey,
  receiveContexts,
  receivePanels,
  receiveSuggestions,
  receiveWords,
  selectionKey,
  selectLemma,
  selectWord,
  setCategory,
  toggleOccurrence,
  wentOffline,
  type UiState,
} from "./state.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) node.setAttribute(name, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Identifiers (sense ids, lemma ids, positions) stay left-to-right islands. */
function ident(doc: Document, text: string): HTMLSpanElement {
  return el(doc, "span", { dir: "ltr", class: "ident" }, text);
}

export class AnnotationApp {
  state: UiState;

  constructor(
    private readonly root: HTMLElement,
    private readonly client: ServiceClient,
    annotatorId: string,
  ) {
    this.state = initialState(annotatorId);
    this.render();
  }

  private update(next: UiState): void {
    this.state = next;
    this.render();
  }

  private async transport<T>(action: () => Promise<T>): Promise<T | undefined> {
    try {
      return await action();
    } catch (err) {
      if (err instanceof ServiceUnreachable) {
        this.update(wentOffline(this.state));
        return undefined;
      }
      throw err;
    }
  }

  async searchWords(query: string): Promise<void> {
    if (!query) return;
    const words = await this.transport(() => this.client.words(query));
    if (words) this.update(receiveWords(this.state, query, words));
  }

  async chooseWord(surface: string): Promise<void> {
    this.update(selectWord(this.state, surface));
    const fetched = await this.transport(async () => {
      const [contexts, suggestions] = await Promise.all([
        this.client.contexts(surface),
        this.client.suggestLemmas(surface),
      ]);
      return { contexts, suggestions };
    });
    if (!fetched) return;
    this.update(
      receiveSuggestions(receiveContexts(this.state, fetched.contexts), fetched.suggestions),
    );
    const first = fetched.suggestions[0];
    if (first) await this.chooseLemma(first.lemma_id);
  }

  async searchLemmas(query: string): Promise<void> {
    if (!query) return;
    const found = await this.transport(() => this.client.searchLemmas(query));
    if (found) this.update(receiveSuggestions(this.state, found));
  }

  async chooseLemma(lemmaId: string): Promise<void> {
    this.update(selectLemma(this.state, lemmaId));
    const panels = await this.transport(() => this.client.senses(lemmaId));
    if (panels) this.update(receivePanels(this.state, panels));
  }

  pickCategory(inventoryId: string, senseId: string, name: CategoryName | null): void {
    this.update(setCategory(this.state, inventoryId, senseId, name));
  }

  tickOccurrence(key: string): void {
    this.update(toggleOccurrence(this.state, key));
  }

  /**
   * Apply-to-all: one bulk request per inventory, stop on the first refusal.
   * Each accepted request bumps the occurrence versions server-side, so later
   * requests in the same apply must expect the versions the receipts returned,
   * not the ones this client saw before the apply started.
   */
  async apply(): Promise<void> {
    const requests = bulkRequests(this.state);
    if (requests.length === 0) return;
    const receipts: BulkReceipt[] = [];
    const bumped: Record<string, number> = {};
    for (const request of requests) {
      const outcome = await this.transport(() =>
        this.client.applyBulk({
          ...request,
          expected_versions: { ...request.expected_versions, ...bumped },
        }),
      );
      if (outcome === undefined) return; // offline; selections preserved
      if (outcome.kind === "conflict") {
        this.update(applyConflicted(this.state, outcome.message, outcome.conflicts));
        return;
      }
      if (outcome.kind === "rejected") {
        this.update(applyRejected(this.state, outcome.message));
        return;
      }
      receipts.push(outcome.receipt);
      Object.assign(bumped, outcome.receipt.versions);
    }
    this.update(applySucceeded(this.state, receipts));
  }

  dismiss(): void {
    this.update(dismissBanner(this.state));
  }

  // ---- rendering -------------------------------------------------------

  render(): void {
    const doc = this.root.ownerDocument;
    const focused = doc.activeElement instanceof HTMLElement ? doc.activeElement.id : "";
    this.root.textContent = "";
    this.root.append(
      this.renderHeader(doc),
      this.renderColumns(doc),
      this.renderFooter(doc),
    );
    if (focused) doc.getElementById(focused)?.focus();
  }

  private renderHeader(doc: Document): HTMLElement {
    const header = el(doc, "header");
    const title = el(doc, "h1", {}, "sense annotation");
    const who = el(doc, "span", { class: "annotator" });
    who.append("annotator ", ident(doc, this.state.annotatorId));
    header.append(title, who);
    if (this.state.progress) {
      const { annotated_words, assigned_words } = this.state.progress;
      header.append(
        el(doc, "span", { id: "progress" }, `${annotated_words} / ${assigned_words} words`),
      );
    }
    const banner = this.renderBanner(doc);
    if (banner) header.append(banner);
    return header;
  }

  private renderBanner(doc: Document): HTMLElement | null {
    const banner = this.state.banner;
    if (!banner) return null;
    const box = el(doc, "div", { id: "banner", role: "alert", class: `banner ${banner.kind}` });
    switch (banner.kind) {
      case "offline":
        box.append(
          el(doc, "p", {}, "Service unreachable. Your selections are kept — retry when it is back."),
        );
        break;
      case "conflict": {
        box.append(el(doc, "p", {}, `Someone else updated these occurrences: ${banner.message}`));
        const retry = el(doc, "button", { id: "retry-apply" }, "reload versions and retry");
        retry.addEventListener("click", () => void this.apply());
        box.append(retry);
        break;
      }
      case "flags": {
        box.append(el(doc, "p", {}, `${banner.flags.length} validation flag(s) on this write:`));
        const list = el(doc, "ul", { class: "flag-list" });
        for (const flag of banner.flags) list.append(this.renderFlag(doc, flag));
        box.append(list);
        break;
      }
      case "rejected":
        box.append(el(doc, "p", {}, `The service refused the write: ${banner.message}`));
        break;
    }
    const dismiss = el(doc, "button", { class: "dismiss" }, "dismiss");
    dismiss.addEventListener("click", () => this.dismiss());
    box.append(dismiss);
    return box;
  }

  private renderFlag(doc: Document, flag: FlagRow): HTMLLIElement {
    const item = el(doc, "li", { class: "flag", "data-rule": flag.rule });
    item.append(
      el(doc, "strong", {}, flag.rule),
      " at ",
      ident(doc, occurrenceKey(flag.sentence_id, flag.token_position)),
      ` in ${flag.inventory_id}: ${flag.details}`,
    );
    return item;
  }

  private renderColumns(doc: Document): HTMLElement {
    const main = el(doc, "main", { class: "columns" });
    main.append(this.renderWords(doc), this.renderContexts(doc), this.renderSenses(doc));
    return main;
  }

  private renderWords(doc: Document): HTMLElement {
    const section = el(doc, "section", { id: "words" });
    section.append(el(doc, "h2", {}, "words"));
    const input = el(doc, "input", {
      id: "word-search",
      type: "search",
      placeholder: "كلمة…",
      value: this.state.wordQuery,
    });
    input.addEventListener("keydown", (event) => {
      if (event.key === "Enter") void this.searchWords(input.value.trim());
    });
    const go = el(doc, "button", { id: "word-search-go" }, "search");
    go.addEventListener("click", () => void this.searchWords(input.value.trim()));
    section.append(input, go);

    const list = el(doc, "ul", { id: "word-list" });
    for (const word of this.state.words) {
      const item = el(doc, "li");
      const pick = el(doc, "button", { class: "word-row", "data-surface": word.surface });
      pick.append(el(doc, "span", { class: "surface" }, word.surface), ` (${word.count})`);
      if (word.surface === this.state.selectedWord) pick.classList.add("selected");
      pick.addEventListener("click", () => void this.chooseWord(word.surface));
      item.append(pick);
      list.append(item);
    }
    section.append(list);
    return section;
  }

  private renderContexts(doc: Document): HTMLElement {
    const section = el(doc, "section", { id: "contexts" });
    section.append(
      el(doc, "h2", {}, this.state.selectedWord ? `contexts of ${this.state.selectedWord}` : "contexts"),
    );
    for (const row of this.state.contexts) section.append(this.renderContext(doc, row));
    return section;
  }

  private renderContext(doc: Document, row: ContextRow): HTMLElement {
    const card = el(doc, "article", { class: "context-card", "data-sentence": row.sentence_id });
    const sentence = el(doc, "p", { class: "sentence", lang: "ar" });
    const targets = new Set(row.positions);
    row.tokens.forEach((token, position) => {
      if (position > 0) sentence.append(" ");
      if (targets.has(position)) {
        sentence.append(
          el(doc, "mark", { class: "target", "data-key": occurrenceKey(row.sentence_id, position) }, token),
        );
      } else {
        sentence.append(el(doc, "span", {}, token));
      }
    });
    card.append(sentence);
    for (const position of row.positions) {
      const key = occurrenceKey(row.sentence_id, position);
      const label = el(doc, "label", { class: "occurrence" });
      const box = el(doc, "input", { type: "checkbox", class: "occurrence-toggle", "data-key": key });
      box.checked = this.state.pending[key] ?? false;
      box.addEventListener("change", () => this.tickOccurrence(key));
      label.append(box, " apply at ", ident(doc, key));
      card.append(label);
    }
    return card;
  }

  private renderSenses(doc: Document): HTMLElement {
    const section = el(doc, "section", { id: "senses" });
    section.append(el(doc, "h2", {}, "senses"));

    const search = el(doc, "input", {
      id: "lemma-search",
      type: "search",
      placeholder: "lemma…",
    });
    search.addEventListener("keydown", (event) => {
      if (event.key === "Enter") void this.searchLemmas(search.value.trim());
    });
    section.append(search);

    const suggestions = el(doc, "ul", { id: "lemma-suggestions" });
    for (const suggestion of this.state.suggestions) {
      const item = el(doc, "li");
      const pick = el(doc, "button", { class: "lemma-row", "data-lemma": suggestion.lemma_id });
      pick.append(
        el(doc, "span", { lang: "ar" }, suggestion.citation_form),
        " ",
        ident(doc, suggestion.lemma_id),
        suggestion.source ? ` [${suggestion.source}]` : "",
      );
      if (suggestion.lemma_id === this.state.selectedLemma) pick.classList.add("selected");
      pick.addEventListener("click", () => void this.chooseLemma(suggestion.lemma_id));
      item.append(pick);
      suggestions.append(item);
    }
    section.append(suggestions);

    for (const inventoryId of Object.keys(this.state.panels).sort()) {
      section.append(this.renderPanel(doc, inventoryId, this.state.panels[inventoryId] ?? []));
    }
    return section;
  }

  private renderPanel(doc: Document, inventoryId: string, senses: SenseRow[]): HTMLElement {
    const panel = el(doc, "section", { class: "panel", "data-inventory": inventoryId });
    panel.append(el(doc, "h3", {}, inventoryId));
    const panelFlags = flagsForInventory(this.state, inventoryId);
    if (senses.length === 0) {
      panel.append(el(doc, "p", { class: "empty" }, "lemma not in this inventory"));
      return panel;
    }
    const list = el(doc, "ul", { class: "sense-list" });
    for (const sense of senses) {
      list.append(this.renderSense(doc, inventoryId, sense, panelFlags));
    }
    panel.append(list);
    return panel;
  }

  private renderSense(
    doc: Document,
    inventoryId: string,
    sense: SenseRow,
    panelFlags: FlagRow[],
  ): HTMLLIElement {
    const key = selectionKey(inventoryId, sense.sense_id);
    const chosen = this.state.selections[key];
    const row = el(doc, "li", { class: "sense-row", "data-sense": key });
    const head = el(doc, "div", { class: "sense-head" });
    head.append(ident(doc, sense.sense_id));
    if (sense.proper_noun) head.append(el(doc, "span", { class: "proper" }, "proper noun"));
    row.append(head, el(doc, "p", { class: "gloss", lang: "ar" }, sense.gloss));

    const flagged = panelFlags.filter((flag) => flag.details.includes(sense.sense_id));
    if (flagged.length > 0) {
      row.classList.add("flagged");
      const first = flagged[0];
      if (first) {
        row.append(el(doc, "p", { class: "sense-flag" }, `${first.rule}: ${first.details}`));
      }
    }

    const group = el(doc, "div", { class: "categories", role: "group" });
    for (const cat of CATEGORIES) {
      const button = el(doc, "button", {
        class: "cat",
        "data-name": cat.name,
        title: `${cat.value} — ${cat.hint}`,
      });
      button.textContent = cat.name;
      button.setAttribute("aria-pressed", chosen === cat.name ? "true" : "false");
      if (chosen === cat.name) button.classList.add("chosen");
      button.addEventListener("click", () =>
        this.pickCategory(inventoryId, sense.sense_id, chosen === cat.name ? null : cat.name),
      );
      group.append(button);
    }
    row.append(group);
    const status = chosen ? `chosen: ${chosen}` : "unset";
    row.append(el(doc, "p", { class: "sense-status" }, status));
    return row;
  }

  private renderFooter(doc: Document): HTMLElement {
    const footer = el(doc, "footer");
    const apply = el(doc, "button", { id: "apply" }, "apply to selected occurrences");
    apply.disabled = !canApply(this.state);
    apply.addEventListener("click", () => void this.apply());
    footer.append(apply);
    return footer;
  }
}

export function mount(root: HTMLElement, client: ServiceClient, annotatorId: string): AnnotationApp {
  return new AnnotationApp(root, client, annotatorId);
}
