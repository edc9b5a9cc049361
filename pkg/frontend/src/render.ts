/** DOM rendering for annotation tasks and live statistics. */

import { Stats, Task } from "./api.js";
import { QUALITY_DIMENSIONS, QualityDimension, Session } from "./session.js";

const RTL_LANGUAGES = new Set(["he", "ar", "fa", "ur", "yi"]);

export function directionFor(language: unknown): "rtl" | "ltr" {
  return typeof language === "string" &&
    RTL_LANGUAGES.has(language.toLowerCase())
    ? "rtl"
    : "ltr";
}

function textBlock(
  title: string,
  text: string,
  dir: "rtl" | "ltr",
  doc: Document,
): HTMLElement {
  const section = doc.createElement("section");
  section.className = "text-block";
  const heading = doc.createElement("h3");
  heading.textContent = title;
  const body = doc.createElement("p");
  body.textContent = text;
  body.dir = dir;
  section.append(heading, body);
  return section;
}

export function renderTask(container: HTMLElement, task: Task): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  container.dataset.taskId = task.id;
  container.dataset.kind = task.kind;

  const dir = directionFor(task.payload["language"]);
  const header = doc.createElement("h2");
  header.textContent =
    task.kind === "match_binary"
      ? "Does this teaser refer to this article?"
      : "Rate the summary (1–5 per dimension)";
  container.append(header);

  const texts = doc.createElement("div");
  texts.className = "texts";
  if (typeof task.payload["teaser"] === "string") {
    texts.append(textBlock("Teaser", task.payload["teaser"], dir, doc));
  }
  if (typeof task.payload["article"] === "string") {
    texts.append(textBlock("Article", task.payload["article"], dir, doc));
  }
  if (typeof task.payload["summary"] === "string") {
    texts.append(textBlock("Summary", task.payload["summary"], dir, doc));
  }
  const documents = task.payload["documents"];
  if (Array.isArray(documents)) {
    documents.forEach((text, index) => {
      if (typeof text === "string") {
        texts.append(textBlock(`Document ${index + 1}`, text, dir, doc));
      }
    });
  }
  container.append(texts);

  const hint = doc.createElement("p");
  hint.className = "shortcut-hint";
  hint.textContent =
    task.kind === "match_binary"
      ? "Press Y for match, N for no match."
      : "Press 1–5 to rate the highlighted dimension.";
  container.append(hint);

  if (task.kind === "quality_1_5") {
    const list = doc.createElement("ul");
    list.className = "dimensions";
    for (const dimension of QUALITY_DIMENSIONS) {
      const item = doc.createElement("li");
      item.dataset.dimension = dimension;
      item.textContent = `${dimension}: —`;
      list.append(item);
    }
    container.append(list);
  }
}

export function renderDimensionState(
  container: HTMLElement,
  filled: Partial<Record<QualityDimension, number>>,
  active: QualityDimension | null,
): void {
  container
    .querySelectorAll<HTMLElement>(".dimensions li")
    .forEach((item) => {
      const dimension = item.dataset.dimension as QualityDimension;
      const value = filled[dimension];
      item.textContent = `${dimension}: ${value ?? "—"}`;
      item.classList.toggle("active", dimension === active);
    });
}

export function renderDrained(container: HTMLElement): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  delete container.dataset.taskId;
  const message = doc.createElement("p");
  message.className = "drained";
  message.textContent = "Queue drained — no tasks left for you.";
  container.append(message);
}

export function renderStats(container: HTMLElement, stats: Stats): void {
  const doc = container.ownerDocument;
  container.replaceChildren();
  const fmt = (value: number | null) =>
    value === null ? "n/a" : value.toFixed(3);
  const rows: [string, string][] = [
    ["progress", `${stats.progress.done}/${stats.progress.total}`],
    ["kappa", fmt(stats.kappa)],
    ["alpha", fmt(stats.alpha)],
    [
      "threshold",
      stats.threshold === null
        ? "n/a"
        : `${stats.threshold.threshold.toFixed(3)} (F1 ${stats.threshold.f1.toFixed(3)})`,
    ],
  ];
  for (const [label, value] of rows) {
    const row = doc.createElement("div");
    row.className = "stat";
    row.dataset.stat = label;
    row.textContent = `${label}: ${value}`;
    container.append(row);
  }
}

/** Wire Y/N and 1-5 keyboard shortcuts to the session. Returns the handler
 * so callers (and tests) can detach or invoke it directly. */
export function bindKeyboard(
  target: EventTarget,
  session: Session,
  container: HTMLElement,
): (event: KeyboardEvent) => void {
  const handler = (event: KeyboardEvent) => {
    const task = session.currentTask;
    if (task === null) {
      return;
    }
    const key = event.key.toLowerCase();
    if (task.kind === "match_binary" && (key === "y" || key === "n")) {
      void session.judgeMatch(key === "y");
    } else if (task.kind === "quality_1_5" && /^[1-5]$/.test(key)) {
      const dimension = session.nextDimension();
      if (dimension !== null) {
        void session
          .rateQuality(dimension, Number(key))
          .then((complete) => {
            if (!complete) {
              renderDimensionState(
                container,
                session.qualityProgress,
                session.nextDimension(),
              );
            }
          });
      }
    }
  };
  target.addEventListener("keydown", handler as EventListener);
  return handler;
}
