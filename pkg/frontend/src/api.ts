/**
 * Typed client for the annotation service. Every server mutation the UI can
 * perform goes through here, and each method maps 1:1 onto a documented
 * endpoint — there are no side channels.
 */

export interface WordRow {
  surface: string;
  count: number;
}

export interface ContextRow {
  sentence_id: string;
  tokens: string[];
  positions: number[];
}

export interface LemmaSuggestion {
  lemma_id: string;
  citation_form: string;
  pos: string;
  source?: string;
}

export interface SenseRow {
  sense_id: string;
  gloss: string;
  rank: number;
  proper_noun: boolean;
}

export interface SensePanels {
  lemma_id: string;
  inventories: Record<string, SenseRow[]>;
}

export interface FlagRow {
  rule: string;
  sentence_id: string;
  token_position: number;
  inventory_id: string;
  annotator_id: string;
  details: string;
}

export interface SessionProgress {
  assigned_words: number;
  annotated_words: number;
}

export interface BulkReceipt {
  sequence: number;
  written: number;
  superseded: number;
  versions: Record<string, number>;
  flags: FlagRow[];
  session: SessionProgress | null;
}

export interface Occurrence {
  sentence_id: string;
  token_position: number;
}

export interface BulkRequest {
  annotator_id: string;
  inventory_id: string;
  lemma_id: string;
  scores: Record<string, number>;
  occurrences: Occurrence[];
  expected_versions: Record<string, number>;
}

export interface VersionConflict {
  expected: number;
  current: number;
}

export type ApplyOutcome =
  | { kind: "ok"; receipt: BulkReceipt }
  | { kind: "conflict"; message: string; conflicts: Record<string, VersionConflict> }
  | { kind: "rejected"; status: number; message: string };

/** Thrown when the service cannot be reached at all (network down, not 4xx). */
export class ServiceUnreachable extends Error {
  constructor(cause: unknown) {
    super("annotation service unreachable");
    this.name = "ServiceUnreachable";
    this.cause = cause;
  }
}

function detailMessage(detail: unknown): string {
  if (typeof detail === "string") return detail;
  if (detail && typeof detail === "object" && "message" in detail) {
    const msg = (detail as { message: unknown }).message;
    if (typeof msg === "string") return msg;
  }
  return JSON.stringify(detail);
}

export class ServiceClient {
  private readonly base: string;
  private readonly fetchImpl: typeof fetch;

  constructor(baseUrl = "", fetchImpl: typeof fetch = fetch) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl;
  }

  private async get<T>(path: string, params: Record<string, string>): Promise<T> {
    const query = new URLSearchParams(params).toString();
    const url = `${this.base}${path}${query ? `?${query}` : ""}`;
    let response: Response;
    try {
      response = await this.fetchImpl(url);
    } catch (err) {
      throw new ServiceUnreachable(err);
    }
    if (!response.ok) {
      const body = await response.json().catch(() => ({ detail: response.statusText }));
      throw new Error(detailMessage((body as { detail?: unknown }).detail));
    }
    return (await response.json()) as T;
  }

  words(query: string): Promise<WordRow[]> {
    return this.get("/words", { query });
  }

  contexts(word: string): Promise<ContextRow[]> {
    return this.get("/contexts", { word });
  }

  suggestLemmas(word: string): Promise<LemmaSuggestion[]> {
    return this.get("/lemmas/suggest", { word });
  }

  searchLemmas(query: string): Promise<LemmaSuggestion[]> {
    return this.get("/lemmas/search", { query });
  }

  senses(lemmaId: string): Promise<SensePanels> {
    return this.get(`/lemmas/${encodeURIComponent(lemmaId)}/senses`, {});
  }

  flags(filter: Partial<Record<"sentence_id" | "annotator_id" | "inventory_id" | "rule", string>> = {}): Promise<FlagRow[]> {
    const params: Record<string, string> = {};
    for (const [key, value] of Object.entries(filter)) {
      if (value !== undefined) params[key] = value;
    }
    return this.get("/validation/flags", params);
  }

  /**
   * POST one atomic score set. Distinguishes the three interesting outcomes:
   * written (receipt), version conflict (409 body), and plain rejection
   * (anything else 4xx/5xx). Transport failure throws ServiceUnreachable so
   * the caller can preserve unsent work.
   */
  async applyBulk(request: BulkRequest): Promise<ApplyOutcome> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.base}/annotations/bulk`, {
        method: "POST",
        headers: {
          "Content-Type": "application/json",
          "X-Annotator-Id": request.annotator_id,
        },
        body: JSON.stringify(request),
      });
    } catch (err) {
      throw new ServiceUnreachable(err);
    }
    const body = (await response.json().catch(() => ({}))) as { detail?: unknown };
    if (response.ok) {
      return { kind: "ok", receipt: body as unknown as BulkReceipt };
    }
    if (response.status === 409) {
      const detail = (body.detail ?? {}) as {
        message?: string;
        conflicts?: Record<string, VersionConflict>;
      };
      return {
        kind: "conflict",
        message: detail.message ?? "version conflict",
        conflicts: detail.conflicts ?? {},
      };
    }
    return {
      kind: "rejected",
      status: response.status,
      message: detailMessage(body.detail ?? response.statusText),
    };
  }
}
