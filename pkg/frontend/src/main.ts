// Browser entry point: resolve the annotator id and boot the app.

import { startApp } from "./app.js";

function annotatorId(): string {
  const fromQuery = new URLSearchParams(window.location.search).get("annotator");
  if (fromQuery) return fromQuery;
  const stored = sessionStorage.getItem("editverify-annotator");
  if (stored) return stored;
  const entered = window.prompt("Annotator id?") ?? "";
  if (entered) sessionStorage.setItem("editverify-annotator", entered);
  return entered;
}

const host = document.querySelector<HTMLElement>("#app");
if (host) {
  const id = annotatorId();
  if (id) {
    void startApp(host, id);
  } else {
    host.textContent = "An annotator id is required (use ?annotator=YOURID).";
  }
}
