// Session driver: fetch a task, render the template, submit, advance.
// Server rejections re-render with the server's error text verbatim;
// network failures keep a local draft for the current edit.

import { fetchNextTask, ServerRejection, submitAnnotation } from "./api.js";
import { renderTask, TemplateView } from "./form.js";
import {
  applySettings,
  loadSettings,
  renderSettingsPanel,
  saveSettings,
} from "./settings.js";
import { AnnotationPayload, Task } from "./types.js";

function draftKey(editId: string): string {
  return `editverify-draft:${editId}`;
}

export function saveDraft(payload: AnnotationPayload, storage: Storage = sessionStorage): void {
  storage.setItem(draftKey(payload.edit_id), JSON.stringify(payload));
}

export function loadDraft(
  editId: string,
  storage: Storage = sessionStorage,
): Partial<AnnotationPayload> | null {
  const raw = storage.getItem(draftKey(editId));
  if (!raw) return null;
  try {
    return JSON.parse(raw);
  } catch {
    return null;
  }
}

export function clearDraft(editId: string, storage: Storage = sessionStorage): void {
  storage.removeItem(draftKey(editId));
}

export interface App {
  view: TemplateView | null;
  refresh(): Promise<void>;
}

export async function startApp(root: HTMLElement, annotatorId: string): Promise<App> {
  root.textContent = "";
  const settingsHost = document.createElement("div");
  settingsHost.className = "settings-host";
  const taskHost = document.createElement("div");
  taskHost.className = "task-host";
  root.appendChild(settingsHost);
  root.appendChild(taskHost);

  const settings = loadSettings();
  applySettings(settings, root);
  renderSettingsPanel(settingsHost, settings, (next) => {
    saveSettings(next);
    applySettings(next, root);
  });

  const app: App = { view: null, refresh: loadNext };

  function renderMessage(text: string, retry: boolean): void {
    taskHost.textContent = "";
    const box = document.createElement("div");
    box.className = "status-box";
    box.textContent = text;
    taskHost.appendChild(box);
    if (retry) {
      const button = document.createElement("button");
      button.type = "button";
      button.dataset.action = "retry";
      button.textContent = "Retry";
      button.addEventListener("click", () => void loadNext());
      taskHost.appendChild(button);
    }
    app.view = null;
  }

  function show(task: Task): void {
    const view = renderTask(taskHost, task, annotatorId, (payload) => void submit(payload));
    const draft = loadDraft(task.edit_id);
    if (draft) {
      view.restoreDraft(draft);
      view.setNotice("Restored an unsent draft for this edit.");
    }
    app.view = view;
  }

  async function submit(payload: AnnotationPayload): Promise<void> {
    try {
      await submitAnnotation(payload);
      clearDraft(payload.edit_id);
      await loadNext();
    } catch (err) {
      if (err instanceof ServerRejection) {
        app.view?.setServerError(err.detail);
      } else {
        saveDraft(payload);
        app.view?.setNotice("Offline: your answers are kept as a local draft.");
      }
    }
  }

  async function loadNext(): Promise<void> {
    try {
      const task = await fetchNextTask(annotatorId);
      if (task === null) {
        renderMessage("No tasks left. Thank you!", false);
      } else {
        show(task);
      }
    } catch {
      renderMessage("Could not reach the annotation service.", true);
    }
  }

  await loadNext();
  return app;
}
