// Thin typed client for the annotation service endpoints.

import { AnnotationPayload, SubmitAck, Task } from "./types.js";

export class ServerRejection extends Error {
  constructor(public status: number, public detail: string) {
    super(detail);
    this.name = "ServerRejection";
  }
}

async function rejectionOf(resp: Response): Promise<ServerRejection> {
  let detail = `${resp.status}`;
  try {
    const body = await resp.json();
    if (body && typeof body.detail === "string") detail = body.detail;
    else detail = JSON.stringify(body);
  } catch {
    /* non-JSON error body: keep the status text */
  }
  return new ServerRejection(resp.status, detail);
}

export async function fetchNextTask(annotator: string): Promise<Task | null> {
  const resp = await fetch(`/tasks/next?annotator=${encodeURIComponent(annotator)}`);
  if (!resp.ok) throw await rejectionOf(resp);
  const body = await resp.json();
  return body.task ?? null;
}

export async function submitAnnotation(payload: AnnotationPayload): Promise<SubmitAck> {
  const resp = await fetch("/annotations", {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!resp.ok) throw await rejectionOf(resp);
  return (await resp.json()) as SubmitAck;
}
