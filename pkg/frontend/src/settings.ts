// Layout preferences (font size, form width, padding), persisted for the
// session and applied via CSS variables without touching form state.

export interface Settings {
  fontSize: number;
  width: number;
  padding: number;
}

export const DEFAULT_SETTINGS: Settings = { fontSize: 15, width: 860, padding: 12 };

const KEY = "editverify-settings";

export function loadSettings(storage: Storage = sessionStorage): Settings {
  try {
    const raw = storage.getItem(KEY);
    if (!raw) return { ...DEFAULT_SETTINGS };
    const parsed = JSON.parse(raw);
    return { ...DEFAULT_SETTINGS, ...parsed };
  } catch {
    return { ...DEFAULT_SETTINGS };
  }
}

export function saveSettings(settings: Settings, storage: Storage = sessionStorage): void {
  storage.setItem(KEY, JSON.stringify(settings));
}

export function applySettings(settings: Settings, root: HTMLElement): void {
  root.style.setProperty("--form-font-size", `${settings.fontSize}px`);
  root.style.setProperty("--form-width", `${settings.width}px`);
  root.style.setProperty("--form-padding", `${settings.padding}px`);
}

export function renderSettingsPanel(
  root: HTMLElement,
  initial: Settings,
  onChange: (s: Settings) => void,
): HTMLElement {
  const panel = document.createElement("div");
  panel.className = "settings-panel";
  panel.dataset.panel = "settings";
  const current = { ...initial };

  const fields: Array<[keyof Settings, string, number, number]> = [
    ["fontSize", "Font size", 10, 28],
    ["width", "Form width", 480, 1600],
    ["padding", "Padding", 0, 48],
  ];
  for (const [key, label, min, max] of fields) {
    const row = document.createElement("label");
    row.className = "settings-row";
    row.textContent = label + " ";
    const input = document.createElement("input");
    input.type = "number";
    input.min = String(min);
    input.max = String(max);
    input.value = String(current[key]);
    input.dataset.setting = key;
    input.addEventListener("input", () => {
      const value = Number(input.value);
      if (!Number.isFinite(value)) return;
      current[key] = Math.min(max, Math.max(min, value));
      onChange({ ...current });
    });
    row.appendChild(input);
    panel.appendChild(row);
  }

  const reset = document.createElement("button");
  reset.type = "button";
  reset.dataset.action = "reset-settings";
  reset.textContent = "Reset to defaults";
  reset.addEventListener("click", () => {
    Object.assign(current, DEFAULT_SETTINGS);
    panel.querySelectorAll<HTMLInputElement>("input[data-setting]").forEach((input) => {
      input.value = String(current[input.dataset.setting as keyof Settings]);
    });
    onChange({ ...current });
  });
  panel.appendChild(reset);
  root.appendChild(panel);
  return panel;
}
