import type { Overrides } from "./types.js";

export interface LocalVerdict {
  accepted: boolean;
  failures: string[];
}

// The server measures length in code points; String.length counts UTF-16
// units and would disagree on anything outside the BMP.
function codePoints(text: string): number {
  let count = 0;
  for (const _ of text) {
    count += 1;
  }
  return count;
}

export function effectiveSurfaces(
  head: string,
  tail: string,
  overrides: Overrides | null
): { head: string; tail: string } {
  return {
    head: overrides?.head ?? head,
    tail: overrides?.tail ?? tail,
  };
}

/**
 * Local mirror of the server's submission check. The server stays
 * authoritative; this only drives the submit button and the hints.
 *
 * Rules (shared golden vectors pin both sides): each effective entity
 * surface must occur case-sensitively in the text, and the text must be at
 * least two characters longer than the two surfaces combined.
 */
export function liveValidate(
  text: string,
  head: string,
  tail: string,
  overrides: Overrides | null = null
): LocalVerdict {
  const eff = effectiveSurfaces(head, tail, overrides);
  const failures: string[] = [];
  if (!text.includes(eff.head)) {
    failures.push("HeadMissing");
  }
  if (!text.includes(eff.tail)) {
    failures.push("TailMissing");
  }
  if (codePoints(text) < codePoints(eff.head) + codePoints(eff.tail) + 2) {
    failures.push("TooShort");
  }
  return { accepted: failures.length === 0, failures: failures.sort() };
}
