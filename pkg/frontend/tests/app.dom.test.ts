// @vitest-environment jsdom
import { describe, expect, it } from "vitest";
import type {
  ApplyOutcome,
  BulkRequest,
  ServiceClient,
} from "../src/api.js";
import { ServiceUnreachable } from "../src/api.js";
import { AnnotationApp } from "../src/app.js";

/** Canned service: enough of ServiceClient for the DOM tests. */
function fakeClient(overrides: Partial<Record<"applyBulk", (req: BulkRequest) => Promise<ApplyOutcome>>> = {}) {
  const bulks: BulkRequest[] = [];
  const client = {
    words: async () => [{ surface: "عين", count: 2 }],
    contexts: async () => [
      { sentence_id: "s2", tokens: ["عين", "الرجل", "تدمع", "."], positions: [0] },
      { sentence_id: "s3", tokens: ["رأى", "سامي", "عين", "الماء", "."], positions: [2] },
    ],
    suggestLemmas: async () => [
      { lemma_id: "ayn_n", citation_form: "عين", pos: "noun", source: "gold" },
    ],
    searchLemmas: async () => [],
    senses: async () => ({
      lemma_id: "ayn_n",
      inventories: {
        modern: [
          { sense_id: "m_ayn_1", gloss: "عضو الإبصار", rank: 0, proper_noun: false },
          { sense_id: "m_ayn_2", gloss: "ينبوع الماء", rank: 1, proper_noun: false },
        ],
        ghani: [{ sense_id: "g_ayn_1", gloss: "الباصرة", rank: 0, proper_noun: false }],
      },
    }),
    flags: async () => [],
    applyBulk: async (req: BulkRequest): Promise<ApplyOutcome> => {
      bulks.push(req);
      const custom = overrides.applyBulk;
      if (custom) return custom(req);
      return {
        kind: "ok",
        receipt: {
          sequence: bulks.length,
          written: Object.keys(req.scores).length * req.occurrences.length,
          superseded: 0,
          versions: Object.fromEntries(
            req.occurrences.map((o) => [`${o.sentence_id}:${o.token_position}`, bulks.length]),
          ),
          flags: [],
          session: { assigned_words: 3, annotated_words: 1 },
        },
      };
    },
  };
  return { bulks, client: client as unknown as ServiceClient };
}

async function mounted(fake = fakeClient()) {
  const root = document.createElement("div");
  document.body.append(root);
  const app = new AnnotationApp(root, fake.client, "a1");
  await app.searchWords("عين");
  await app.chooseWord("عين");
  return { root, app, ...fake };
}

function click(root: HTMLElement, selector: string): void {
  const node = root.querySelector(selector);
  if (!(node instanceof HTMLElement)) throw new Error(`no element for ${selector}`);
  node.click();
}

describe("word and context rendering", () => {
  it("renders the word list and, on selection, every context with the target marked", async () => {
    const { root } = await mounted();
    const row = root.querySelector(".word-row[data-surface='عين']");
    expect(row?.classList.contains("selected")).toBe(true);

    const cards = root.querySelectorAll(".context-card");
    expect(cards).toHaveLength(2);
    const marks = [...root.querySelectorAll("mark.target")];
    expect(marks.map((m) => m.textContent)).toEqual(["عين", "عين"]);
    expect(marks.map((m) => m.getAttribute("data-key"))).toEqual(["s2:0", "s3:2"]);

    const boxes = [...root.querySelectorAll<HTMLInputElement>(".occurrence-toggle")];
    expect(boxes.map((b) => b.checked)).toEqual([true, true]);
  });

  it("auto-selects the top gold lemma and shows both inventory panels", async () => {
    const { root, app } = await mounted();
    expect(app.state.selectedLemma).toBe("ayn_n");
    const panels = [...root.querySelectorAll(".panel")].map((p) => p.getAttribute("data-inventory"));
    expect(panels).toEqual(["ghani", "modern"]);
    // every sense renders unset with exactly six category buttons
    for (const row of root.querySelectorAll(".sense-row")) {
      expect(row.querySelectorAll("button.cat")).toHaveLength(6);
      expect(row.querySelector(".sense-status")?.textContent).toBe("unset");
    }
  });
});

describe("apply gating and requests", () => {
  it("keeps apply disabled until a category is chosen, then posts per inventory", async () => {
    const { root, app, bulks } = await mounted();
    const apply = root.querySelector<HTMLButtonElement>("#apply");
    expect(apply?.disabled).toBe(true);

    click(root, ".sense-row[data-sense='modern/m_ayn_1'] button.cat[data-name='Explicate']");
    click(root, ".sense-row[data-sense='ghani/g_ayn_1'] button.cat[data-name='General']");
    const enabled = root.querySelector<HTMLButtonElement>("#apply");
    expect(enabled?.disabled).toBe(false);

    await app.apply();
    expect(bulks.map((b) => b.inventory_id)).toEqual(["ghani", "modern"]);
    expect(bulks[1]?.scores).toEqual({ m_ayn_1: 100 });
    expect(bulks[0]?.occurrences).toHaveLength(2);
    // the second request must expect the versions the first one bumped to
    expect(bulks[0]?.expected_versions).toEqual({ "s2:0": 0, "s3:2": 0 });
    expect(bulks[1]?.expected_versions).toEqual({ "s2:0": 1, "s3:2": 1 });
    // selections cleared, progress shown
    expect(app.state.selections).toEqual({});
    expect(root.querySelector("#progress")?.textContent).toBe("1 / 3 words");
  });

  it("clicking a chosen category again clears it back to unset", async () => {
    const { root } = await mounted();
    const selector = ".sense-row[data-sense='modern/m_ayn_2'] button.cat[data-name='Related']";
    click(root, selector);
    expect(root.querySelector(selector)?.getAttribute("aria-pressed")).toBe("true");
    click(root, selector);
    expect(root.querySelector(selector)?.getAttribute("aria-pressed")).toBe("false");
    expect(root.querySelector<HTMLButtonElement>("#apply")?.disabled).toBe(true);
  });
});

describe("banners", () => {
  it("renders returned flags as a banner and marks the senses inline", async () => {
    const flag = {
      rule: "MultipleCorrectSenses",
      sentence_id: "s2",
      token_position: 0,
      inventory_id: "modern",
      annotator_id: "a1",
      details: "2 senses scored Explicate/General: m_ayn_1, m_ayn_2",
    };
    const fake = fakeClient({
      applyBulk: async (req) => ({
        kind: "ok",
        receipt: {
          sequence: 1,
          written: 2,
          superseded: 0,
          versions: Object.fromEntries(
            req.occurrences.map((o) => [`${o.sentence_id}:${o.token_position}`, 1]),
          ),
          flags: [flag],
          session: null,
        },
      }),
    });
    const { root, app } = await mounted(fake);
    click(root, ".sense-row[data-sense='modern/m_ayn_1'] button.cat[data-name='Explicate']");
    click(root, ".sense-row[data-sense='modern/m_ayn_2'] button.cat[data-name='General']");
    await app.apply();

    const banner = root.querySelector("#banner.flags");
    expect(banner).not.toBeNull();
    expect(banner?.querySelector("li[data-rule='MultipleCorrectSenses']")).not.toBeNull();
    const flaggedRows = [...root.querySelectorAll(".sense-row.flagged")].map((r) =>
      r.getAttribute("data-sense"),
    );
    expect(flaggedRows).toEqual(["modern/m_ayn_1", "modern/m_ayn_2"]);

    click(root, "#banner button.dismiss");
    expect(root.querySelector("#banner")).toBeNull();
  });

  it("shows the offline banner and keeps unsent selections", async () => {
    const fake = fakeClient({
      applyBulk: async () => {
        throw new ServiceUnreachable(new Error("down"));
      },
    });
    const { root, app } = await mounted(fake);
    click(root, ".sense-row[data-sense='modern/m_ayn_1'] button.cat[data-name='Explicate']");
    await app.apply();
    expect(root.querySelector("#banner.offline")).not.toBeNull();
    expect(app.state.selections).toEqual({ "modern/m_ayn_1": "Explicate" });
  });

  it("shows the conflict banner with a retry that re-posts fresh versions", async () => {
    let first = true;
    const fake = fakeClient({
      applyBulk: async (req) => {
        if (first) {
          first = false;
          return {
            kind: "conflict",
            message: "1 stale occurrence(s)",
            conflicts: { "s2:0": { expected: 0, current: 2 } },
          };
        }
        return {
          kind: "ok",
          receipt: {
            sequence: 9,
            written: 2,
            superseded: 0,
            versions: Object.fromEntries(
              req.occurrences.map((o) => [`${o.sentence_id}:${o.token_position}`, 3]),
            ),
            flags: [],
            session: null,
          },
        };
      },
    });
    const { root, app, bulks } = await mounted(fake);
    click(root, ".sense-row[data-sense='modern/m_ayn_1'] button.cat[data-name='Explicate']");
    await app.apply();
    expect(root.querySelector("#banner.conflict")).not.toBeNull();
    expect(app.state.selections).toEqual({ "modern/m_ayn_1": "Explicate" });

    await app.apply(); // what the retry button triggers
    expect(bulks).toHaveLength(2);
    expect(bulks[1]?.expected_versions["s2:0"]).toBe(2);
    expect(root.querySelector("#banner")).toBeNull();
    expect(app.state.versions["s2:0"]).toBe(3);
  });
});
