import { ApiClient } from "./api.js";
import {
  bindKeyboard,
  renderDimensionState,
  renderDrained,
  renderStats,
  renderTask,
} from "./render.js";
import { Session } from "./session.js";

function annotatorName(): string {
  const params = new URLSearchParams(window.location.search);
  const fromUrl = params.get("annotator");
  if (fromUrl) {
    return fromUrl;
  }
  const stored = window.localStorage.getItem("annotator");
  if (stored) {
    return stored;
  }
  const name = window.prompt("Annotator name?") || "anonymous";
  window.localStorage.setItem("annotator", name);
  return name;
}

async function refreshStats(session: Session, panel: HTMLElement) {
  try {
    renderStats(panel, await session.stats());
  } catch {
    /* stats are advisory; keep the last rendered state */
  }
}

export async function boot(root: Document = document): Promise<Session> {
  const taskPanel = root.getElementById("task")!;
  const statsPanel = root.getElementById("stats")!;
  const api = new ApiClient("");
  const session = new Session(api, annotatorName(), {
    onTask: (task) => {
      renderTask(taskPanel, task);
      if (task.kind === "quality_1_5") {
        renderDimensionState(taskPanel, {}, "coherence");
      }
    },
    onDrained: () => {
      renderDrained(taskPanel);
      void refreshStats(session, statsPanel);
    },
    onSubmitted: () => void refreshStats(session, statsPanel),
  });
  bindKeyboard(root, session, taskPanel);
  await session.start();
  await refreshStats(session, statsPanel);
  return session;
}

if (typeof document !== "undefined" && document.getElementById("task")) {
  void boot();
}
