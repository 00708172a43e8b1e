// The annotation template: side-by-side edit view plus the five question
// blocks, with client-side validation gating the submit button.

import { AnnotationPayload, Task } from "./types.js";
import { renderTree } from "./trees.js";
import { validatePayload, Violation } from "./validation.js";

export interface TemplateView {
  root: HTMLElement;
  task: Task;
  submitButton: HTMLButtonElement;
  readPayload(): AnnotationPayload;
  violations(): Violation[];
  setServerError(text: string): void;
  setNotice(text: string): void;
  restoreDraft(draft: Partial<AnnotationPayload>): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function radioGroup(name: string, options: readonly string[]): HTMLElement {
  const wrap = el("div", "options");
  for (const option of options) {
    const label = el("label", "option");
    const input = document.createElement("input");
    input.type = "radio";
    input.name = name;
    input.value = option;
    label.appendChild(input);
    label.appendChild(document.createTextNode(" " + option));
    wrap.appendChild(label);
  }
  return wrap;
}

function questionBlock(
  key: string,
  title: string,
  treeKey: string,
  body: HTMLElement,
): HTMLElement {
  const block = el("section", "question-block");
  block.dataset.question = key;
  const header = el("div", "question-header");
  header.appendChild(el("h3", undefined, title));
  const treeButton = el("button", "tree-toggle", "tree");
  treeButton.type = "button";
  treeButton.title = "Open the decision tree for this question";
  header.appendChild(treeButton);
  block.appendChild(header);
  const panel = renderTree(treeKey);
  panel.hidden = true;
  treeButton.addEventListener("click", () => {
    panel.hidden = !panel.hidden;
  });
  block.appendChild(panel);
  block.appendChild(body);
  return block;
}

export function renderTask(
  container: HTMLElement,
  task: Task,
  annotatorId: string,
  onSubmit: (payload: AnnotationPayload) => void,
): TemplateView {
  container.textContent = "";
  const root = el("div", "template");
  container.appendChild(root);

  // Edit view: images, mask toggle, instruction.
  const editView = el("div", "edit-view");
  const images = el("div", "images");
  for (const [cls, url, caption] of [
    ["source", task.source_url, "before"],
    ["edited", task.edited_url, "after"],
  ] as const) {
    const fig = el("figure", `image-${cls}`);
    const img = document.createElement("img");
    img.src = url;
    img.alt = caption;
    const mask = document.createElement("img");
    mask.src = task.mask_url;
    mask.className = "mask-overlay";
    mask.hidden = true;
    fig.appendChild(img);
    fig.appendChild(mask);
    fig.appendChild(el("figcaption", undefined, caption));
    images.appendChild(fig);
  }
  editView.appendChild(images);
  const maskToggle = el("label", "mask-toggle");
  const maskBox = document.createElement("input");
  maskBox.type = "checkbox";
  maskBox.dataset.action = "toggle-mask";
  maskBox.addEventListener("change", () => {
    root.querySelectorAll<HTMLImageElement>(".mask-overlay").forEach((m) => {
      m.hidden = !maskBox.checked;
    });
  });
  maskToggle.appendChild(maskBox);
  maskToggle.appendChild(document.createTextNode(" show edit mask"));
  editView.appendChild(maskToggle);
  const instruction = el("p", "instruction");
  instruction.appendChild(el("strong", undefined, "Instruction: "));
  instruction.appendChild(document.createTextNode(task.instruction));
  editView.appendChild(instruction);
  root.appendChild(editView);

  const form = el("form", "annotation-form");
  form.addEventListener("submit", (event) => event.preventDefault());

  // 1. Accuracy Level
  const accuracyBody = radioGroup("accuracy_level", task.accuracy_options);
  form.appendChild(questionBlock("accuracy", "Accuracy Level", "accuracy", accuracyBody));

  // 2. Contextual Consistency
  const contextualBody = el("div");
  const feedbackRequired = el("p", "required-note", "Feedback required for this accuracy level.");
  feedbackRequired.hidden = true;
  const contextualArea = document.createElement("textarea");
  contextualArea.name = "contextual_feedback";
  contextualArea.placeholder =
    "How does the edit miss the instruction, the scene, or common sense?";
  contextualBody.appendChild(feedbackRequired);
  contextualBody.appendChild(contextualArea);
  form.appendChild(
    questionBlock("contextual", "Contextual Consistency", "contextual", contextualBody),
  );

  // 3. Technical Precision
  const technicalBody = el("div");
  technicalBody.appendChild(radioGroup("technical_ok", ["Yes", "No"]));
  const technicalArea = document.createElement("textarea");
  technicalArea.name = "technical_feedback";
  technicalArea.placeholder = "Resolution, blur, smoothness issues in the edited area";
  technicalBody.appendChild(technicalArea);
  form.appendChild(
    questionBlock("technical", "Technical Precision", "technical", technicalBody),
  );

  // 4. Artifacts
  const artifactBody = radioGroup("artifact_level", task.artifact_options);
  form.appendChild(questionBlock("artifacts", "Artifacts", "artifacts", artifactBody));

  // 5. Difference Caption
  const captionBody = el("div");
  const captionArea = document.createElement("textarea");
  captionArea.name = "final_caption";
  captionArea.value = task.prefilled_caption;
  captionBody.appendChild(captionArea);
  captionBody.appendChild(radioGroup("caption_verdict", ["accepted", "corrected"]));
  form.appendChild(questionBlock("caption", "Difference Caption", "caption", captionBody));

  const errorBox = el("div", "error-box");
  errorBox.hidden = true;
  form.appendChild(errorBox);
  const noticeBox = el("div", "notice-box");
  noticeBox.hidden = true;
  form.appendChild(noticeBox);

  const submitButton = el("button", "submit") as HTMLButtonElement;
  submitButton.type = "submit";
  submitButton.textContent = "Submit annotation";
  submitButton.disabled = true;
  form.appendChild(submitButton);
  root.appendChild(form);

  function radioValue(name: string): string {
    const checked = form.querySelector<HTMLInputElement>(`input[name="${name}"]:checked`);
    return checked ? checked.value : "";
  }

  function readPayload(): AnnotationPayload {
    return {
      edit_id: task.edit_id,
      annotator_id: annotatorId,
      accuracy_level: radioValue("accuracy_level"),
      contextual_feedback: contextualArea.value,
      technical_ok: radioValue("technical_ok") === "Yes",
      technical_feedback: technicalArea.value,
      artifact_level: radioValue("artifact_level"),
      caption_verdict: radioValue("caption_verdict"),
      final_caption: captionArea.value,
    };
  }

  function violations(): Violation[] {
    const payload = readPayload();
    const problems = validatePayload(payload);
    // The technical_ok radio reads as false when untouched; require an
    // explicit choice before submitting.
    if (!radioValue("technical_ok")) {
      problems.push({ code: "schema", message: "Answer the technical precision question." });
    }
    return problems;
  }

  function refresh(): void {
    const payload = readPayload();
    feedbackRequired.hidden =
      payload.accuracy_level === "" || payload.accuracy_level === "Accurate";
    submitButton.disabled = violations().length > 0;
  }

  form.addEventListener("input", refresh);
  form.addEventListener("change", refresh);
  submitButton.addEventListener("click", () => {
    if (violations().length === 0) onSubmit(readPayload());
  });

  function setRadio(name: string, value: string): void {
    const input = form.querySelector<HTMLInputElement>(
      `input[name="${name}"][value="${value}"]`,
    );
    if (input) input.checked = true;
  }

  const view: TemplateView = {
    root,
    task,
    submitButton,
    readPayload,
    violations,
    setServerError(text: string) {
      errorBox.hidden = false;
      errorBox.textContent = text;
    },
    setNotice(text: string) {
      noticeBox.hidden = false;
      noticeBox.textContent = text;
    },
    restoreDraft(draft: Partial<AnnotationPayload>) {
      if (draft.accuracy_level) setRadio("accuracy_level", draft.accuracy_level);
      if (draft.contextual_feedback !== undefined)
        contextualArea.value = draft.contextual_feedback;
      if (draft.technical_ok !== undefined)
        setRadio("technical_ok", draft.technical_ok ? "Yes" : "No");
      if (draft.technical_feedback !== undefined)
        technicalArea.value = draft.technical_feedback;
      if (draft.artifact_level) setRadio("artifact_level", draft.artifact_level);
      if (draft.caption_verdict) setRadio("caption_verdict", draft.caption_verdict);
      if (draft.final_caption !== undefined) captionArea.value = draft.final_caption;
      refresh();
    },
  };
  refresh();
  return view;
}
