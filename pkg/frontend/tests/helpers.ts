import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { collectElements, type AppElements } from "../src/app.js";
import type { MindMapEnvelope, ReportView, SessionEvent, SnapshotView } from "../src/types.js";

const HERE = dirname(fileURLToPath(import.meta.url));

function readFixture(name: string): string {
  return readFileSync(join(HERE, "fixtures", name), "utf8");
}

export function loadSnapshot(): SnapshotView {
  return JSON.parse(readFixture("snapshot.json")) as SnapshotView;
}

export function loadMindMap(): MindMapEnvelope {
  return JSON.parse(readFixture("mindmap.json")) as MindMapEnvelope;
}

export function loadReport(): ReportView {
  return JSON.parse(readFixture("report.json")) as ReportView;
}

export function loadEvents(): SessionEvent[] {
  return readFixture("events.jsonl")
    .split("\n")
    .filter((line) => line.trim())
    .map((line) => JSON.parse(line) as SessionEvent);
}

/**
 * Mounts the real page shell into jsdom and resolves the controller's
 * element handles. Collecting from the genuine index.html keeps these
 * tests honest about the ids the page actually provides.
 */
export function mountShell(): AppElements {
  const page = readFileSync(join(HERE, "..", "index.html"), "utf8");
  const body = page
    .replace(/^[\s\S]*<body>/, "")
    .replace(/<\/body>[\s\S]*$/, "")
    .replace(/<script[\s\S]*?<\/script>/g, "");
  document.body.innerHTML = body;
  return collectElements(document);
}
