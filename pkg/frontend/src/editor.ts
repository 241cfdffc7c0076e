/**
 * Insert a snippet at the caret, replacing any selection, and leave the
 * caret right after the inserted text. Fires an input event so listeners
 * see click-inserts and typing the same way.
 */
export function insertAtCaret(field: HTMLTextAreaElement, snippet: string): void {
  const start = field.selectionStart ?? field.value.length;
  const end = field.selectionEnd ?? start;
  field.value = field.value.slice(0, start) + snippet + field.value.slice(end);
  const caret = start + snippet.length;
  field.setSelectionRange(caret, caret);
  field.dispatchEvent(new Event("input", { bubbles: true }));
}
