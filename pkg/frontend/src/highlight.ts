export interface HighlightState {
  head: boolean;
  tail: boolean;
}

// Pure function of (draft, effective surfaces): an entity lights up exactly
// when its surface occurs in the draft, matching the validation rule.
export function highlightState(
  text: string,
  headSurface: string,
  tailSurface: string
): HighlightState {
  return {
    head: text.includes(headSurface),
    tail: text.includes(tailSurface),
  };
}
