import { ApiError } from "./api.js";
import { insertAtCaret } from "./editor.js";
import { highlightState } from "./highlight.js";
import { effectiveSurfaces, liveValidate } from "./validation.js";
import type { ApiClient, Overrides, TaskPayload } from "./types.js";

type Slot = "head" | "tail";

const HINT_TEXT: Record<string, string> = {
  HeadMissing: "the first entity is not in your sentence yet",
  TailMissing: "the second entity is not in your sentence yet",
  TooShort: "connect the entities with at least two more characters",
};

const TEMPLATE = `
  <div class="banner hidden" role="alert"></div>
  <div class="screen-task hidden">
    <p class="intro">
      Write one sentence that expresses the relation between the two
      entities. Click an entity to insert it at the cursor; hover the
      relation for its description. Both entities must appear in your
      sentence exactly as shown (use edit if a different form reads better).
    </p>
    <div class="progress"></div>
    <div class="triple">
      <span class="entity-box">
        <button type="button" class="entity-chip" data-slot="head"></button>
        <button type="button" class="entity-edit" data-slot="head">edit</button>
      </span>
      <span class="relation"></span>
      <span class="entity-box">
        <button type="button" class="entity-chip" data-slot="tail"></button>
        <button type="button" class="entity-edit" data-slot="tail">edit</button>
      </span>
    </div>
    <div class="edit-dialog hidden">
      <label>Entity name <input class="edit-input" type="text" /></label>
      <button type="button" class="edit-apply">apply</button>
      <button type="button" class="edit-cancel">cancel</button>
    </div>
    <textarea class="draft" rows="3" placeholder="Your sentence"></textarea>
    <ul class="hints"></ul>
    <div class="server-error hidden"></div>
    <div class="actions">
      <button type="button" class="submit" disabled>submit</button>
      <button type="button" class="report">report broken triple</button>
    </div>
  </div>
  <div class="screen-done hidden"></div>
`;

export interface App {
  start(annotatorId: string, n?: number): Promise<void>;
}

export function createApp(root: HTMLElement, api: ApiClient): App {
  root.innerHTML = TEMPLATE;

  const pick = <T extends HTMLElement>(selector: string): T => {
    const el = root.querySelector<T>(selector);
    if (!el) {
      throw new Error(`app template is missing ${selector}`);
    }
    return el;
  };

  const banner = pick<HTMLDivElement>(".banner");
  const taskScreen = pick<HTMLDivElement>(".screen-task");
  const doneScreen = pick<HTMLDivElement>(".screen-done");
  const progress = pick<HTMLDivElement>(".progress");
  const relation = pick<HTMLSpanElement>(".relation");
  const chips: Record<Slot, HTMLButtonElement> = {
    head: pick<HTMLButtonElement>('.entity-chip[data-slot="head"]'),
    tail: pick<HTMLButtonElement>('.entity-chip[data-slot="tail"]'),
  };
  const editButtons: Record<Slot, HTMLButtonElement> = {
    head: pick<HTMLButtonElement>('.entity-edit[data-slot="head"]'),
    tail: pick<HTMLButtonElement>('.entity-edit[data-slot="tail"]'),
  };
  const editDialog = pick<HTMLDivElement>(".edit-dialog");
  const editInput = pick<HTMLInputElement>(".edit-input");
  const draft = pick<HTMLTextAreaElement>(".draft");
  const hints = pick<HTMLUListElement>(".hints");
  const serverError = pick<HTMLDivElement>(".server-error");
  const submitButton = pick<HTMLButtonElement>(".submit");
  const reportButton = pick<HTMLButtonElement>(".report");

  let sessionId = "";
  let task: TaskPayload | null = null;
  let overrides: Overrides = {};
  let editingSlot: Slot | null = null;
  let inFlight = false;

  function showBanner(message: string): void {
    banner.textContent = message;
    banner.classList.remove("hidden");
  }

  function fail(error: unknown): void {
    if (error instanceof ApiError && error.status === 404) {
      showBanner("Session expired. Reload the page to start over.");
    } else {
      showBanner("The annotation service is unreachable. Please retry.");
    }
  }

  function overridesOrNull(): Overrides | null {
    return Object.keys(overrides).length > 0 ? overrides : null;
  }

  function surfaces(): { head: string; tail: string } {
    const triple = task?.triple;
    return effectiveSurfaces(triple?.head ?? "", triple?.tail ?? "", overridesOrNull());
  }

  // Recompute everything derived from the draft: highlight chips, hints,
  // and the submit gate. Never issues a request.
  function refresh(): void {
    if (!task || task.completed || !task.triple) {
      return;
    }
    const eff = surfaces();
    const lit = highlightState(draft.value, eff.head, eff.tail);
    chips.head.classList.toggle("present", lit.head);
    chips.tail.classList.toggle("present", lit.tail);

    const verdict = liveValidate(
      draft.value,
      task.triple.head,
      task.triple.tail,
      overridesOrNull()
    );
    hints.innerHTML = "";
    for (const code of verdict.failures) {
      const item = document.createElement("li");
      item.dataset.code = code;
      item.textContent = HINT_TEXT[code] ?? code;
      hints.appendChild(item);
    }
    submitButton.disabled = !verdict.accepted || inFlight;
  }

  function closeDialog(): void {
    editingSlot = null;
    editDialog.classList.add("hidden");
  }

  function renderTask(payload: TaskPayload): void {
    task = payload;
    overrides = {};
    closeDialog();
    serverError.classList.add("hidden");

    if (payload.completed) {
      taskScreen.classList.add("hidden");
      doneScreen.textContent = `All ${payload.progress.total} sentences submitted. Thank you!`;
      doneScreen.classList.remove("hidden");
      return;
    }

    const triple = payload.triple;
    if (!triple) {
      showBanner("The annotation service sent an unusable task.");
      return;
    }
    doneScreen.classList.add("hidden");
    taskScreen.classList.remove("hidden");
    progress.textContent = `Sentence ${payload.progress.current + 1} of ${payload.progress.total}`;

    relation.textContent = triple.relation_label;
    if (payload.relation_description) {
      relation.title = payload.relation_description;
    } else {
      relation.removeAttribute("title");
    }

    for (const slot of ["head", "tail"] as Slot[]) {
      chips[slot].textContent = triple[slot];
      const description = payload.entity_descriptions?.[slot];
      if (description) {
        chips[slot].title = description;
      } else {
        chips[slot].removeAttribute("title");
      }
    }

    draft.value = "";
    refresh();
  }

  async function loadNext(): Promise<void> {
    try {
      renderTask(await api.nextTask(sessionId));
    } catch (error) {
      fail(error);
    }
  }

  draft.addEventListener("input", refresh);

  for (const slot of ["head", "tail"] as Slot[]) {
    chips[slot].addEventListener("click", () => {
      insertAtCaret(draft, surfaces()[slot]);
      draft.focus();
    });
    editButtons[slot].addEventListener("click", () => {
      editingSlot = slot;
      editInput.value = surfaces()[slot];
      editDialog.classList.remove("hidden");
      editInput.focus();
    });
  }

  editDialog.querySelector(".edit-apply")!.addEventListener("click", () => {
    if (!editingSlot || !task?.triple) {
      return;
    }
    const value = editInput.value;
    if (value === task.triple[editingSlot]) {
      delete overrides[editingSlot];
    } else {
      overrides[editingSlot] = value;
    }
    chips[editingSlot].textContent = value;
    closeDialog();
    refresh();
  });

  editDialog.querySelector(".edit-cancel")!.addEventListener("click", closeDialog);

  submitButton.addEventListener("click", async () => {
    if (!task?.triple || inFlight) {
      return;
    }
    // Belt and braces: the button is disabled while invalid, but the
    // invariant is that no request ever leaves with a failing local verdict.
    const verdict = liveValidate(
      draft.value,
      task.triple.head,
      task.triple.tail,
      overridesOrNull()
    );
    if (!verdict.accepted) {
      return;
    }
    inFlight = true;
    refresh();
    try {
      const response = await api.submit(
        sessionId,
        task.triple.id,
        draft.value,
        overridesOrNull()
      );
      if (response.accepted) {
        serverError.classList.add("hidden");
        await loadNext();
      } else {
        // Divergence from the authoritative check: surface it, keep the draft.
        serverError.textContent = `The server rejected this sentence: ${response.failures.join(", ")}`;
        serverError.classList.remove("hidden");
      }
    } catch (error) {
      fail(error);
    } finally {
      inFlight = false;
      refresh();
    }
  });

  reportButton.addEventListener("click", async () => {
    if (!task?.triple || inFlight) {
      return;
    }
    inFlight = true;
    try {
      await api.report(sessionId, task.triple.id);
      await loadNext();
    } catch (error) {
      fail(error);
    } finally {
      inFlight = false;
    }
  });

  return {
    async start(annotatorId: string, n?: number): Promise<void> {
      try {
        const session = await api.createSession(annotatorId, n);
        sessionId = session.session_id;
        await loadNext();
      } catch (error) {
        fail(error);
      }
    },
  };
}
