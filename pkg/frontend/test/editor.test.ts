import { describe, expect, it } from "vitest";

import { insertAtCaret } from "../src/editor";

function makeField(value = "", caret?: number): HTMLTextAreaElement {
  const field = document.createElement("textarea");
  field.value = value;
  const position = caret ?? value.length;
  field.setSelectionRange(position, position);
  return field;
}

describe("insertAtCaret", () => {
  it("fills an empty field and parks the caret at the end", () => {
    const field = makeField();
    insertAtCaret(field, "Abbey Road");
    expect(field.value).toBe("Abbey Road");
    expect(field.selectionStart).toBe(10);
    expect(field.selectionEnd).toBe(10);
  });

  it("inserts mid-text at the caret", () => {
    const field = makeField("X lives in .", 11);
    insertAtCaret(field, "Paris");
    expect(field.value).toBe("X lives in Paris.");
    expect(field.selectionStart).toBe(16);
  });

  it("replaces an active selection", () => {
    const field = makeField("the THING here");
    field.setSelectionRange(4, 9);
    insertAtCaret(field, "band");
    expect(field.value).toBe("the band here");
    expect(field.selectionStart).toBe(8);
  });

  it("fires an input event so validation reruns", () => {
    const field = makeField();
    let seen = 0;
    field.addEventListener("input", () => {
      seen += 1;
    });
    insertAtCaret(field, "x");
    expect(seen).toBe(1);
  });
});
