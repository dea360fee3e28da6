/**
 * The six-step judgement scale. This is the only place score numbers exist in
 * the client: everything sent to the service goes through `scoreValue`, so the
 * wire can never carry a value outside the legal six.
 */

export type CategoryName =
  | "Explicate"
  | "General"
  | "Referral"
  | "Related"
  | "RootSemantics"
  | "Different";

export type ScoreValue = 100 | 80 | 60 | 40 | 20 | 1;

export interface Category {
  name: CategoryName;
  value: ScoreValue;
  /** Scores at or above 60 mean "this sense fits the occurrence". */
  correct: boolean;
  /** Short operator-facing hint shown in the tooltip. */
  hint: string;
}

export const CATEGORIES: readonly Category[] = [
  { name: "Explicate", value: 100, correct: true, hint: "the sense captures this occurrence exactly" },
  { name: "General", value: 80, correct: true, hint: "fits, but broader than the usage here" },
  { name: "Referral", value: 60, correct: true, hint: "the entry defers to another sense that fits" },
  { name: "Related", value: 40, correct: false, hint: "connected meaning, not the one used here" },
  { name: "RootSemantics", value: 20, correct: false, hint: "shares only the root's core meaning" },
  { name: "Different", value: 1, correct: false, hint: "unrelated to this occurrence" },
];

const BY_NAME = new Map(CATEGORIES.map((c) => [c.name, c]));

export function isCategoryName(raw: string): raw is CategoryName {
  return BY_NAME.has(raw as CategoryName);
}

export function scoreValue(name: CategoryName): ScoreValue {
  const found = BY_NAME.get(name);
  if (!found) throw new TypeError(`unknown category ${JSON.stringify(name)}`);
  return found.value;
}

export function category(name: CategoryName): Category {
  const found = BY_NAME.get(name);
  if (!found) throw new TypeError(`unknown category ${JSON.stringify(name)}`);
  return found;
}
