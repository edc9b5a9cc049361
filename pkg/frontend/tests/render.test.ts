// @vitest-environment happy-dom
import { describe, expect, it } from "vitest";

import { Task } from "../src/api.js";
import { directionFor, renderStats, renderTask } from "../src/render.js";

const matchTask: Task = {
  id: "p0~1",
  item_id: "p0",
  kind: "match_binary",
  payload: { teaser: "Story continues", article: "The story", language: "en" },
  copy: 1,
  status: "pending",
};

describe("directionFor", () => {
  it.each([
    ["he", "rtl"],
    ["ar", "rtl"],
    ["HE", "rtl"],
    ["en", "ltr"],
    ["el", "ltr"],
    [undefined, "ltr"],
    [42, "ltr"],
  ])("maps %s to %s", (language, expected) => {
    expect(directionFor(language)).toBe(expected);
  });
});

describe("renderTask", () => {
  it("labels the task and shows the shortcut hint", () => {
    const panel = document.createElement("div");
    document.body.append(panel);
    renderTask(panel, matchTask);
    expect(panel.dataset.taskId).toBe("p0~1");
    expect(panel.querySelector("h2")!.textContent).toContain("teaser");
    expect(panel.querySelector(".shortcut-hint")!.textContent).toContain("Y");
    expect(panel.querySelectorAll(".dimensions")).toHaveLength(0);
  });

  it("lists all four quality dimensions", () => {
    const panel = document.createElement("div");
    renderTask(panel, {
      ...matchTask,
      kind: "quality_1_5",
      payload: { summary: "s", documents: ["d1", "d2"], language: "he" },
    });
    const items = panel.querySelectorAll(".dimensions li");
    expect([...items].map((i) => (i as HTMLElement).dataset.dimension)).toEqual(
      ["coherence", "consistency", "fluency", "relevance"],
    );
    expect(panel.querySelectorAll(".text-block")).toHaveLength(3);
  });
});

describe("renderStats", () => {
  it("formats available and missing statistics", () => {
    const panel = document.createElement("div");
    renderStats(panel, {
      progress: { done: 3, total: 14 },
      kappa: 0.4,
      alpha: null,
      alpha_per_dimension: null,
      threshold: { threshold: 0.8, precision: 1, recall: 1, f1: 1 },
    });
    const byStat = (name: string) =>
      panel.querySelector<HTMLElement>(`[data-stat="${name}"]`)!.textContent;
    expect(byStat("progress")).toBe("progress: 3/14");
    expect(byStat("kappa")).toBe("kappa: 0.400");
    expect(byStat("alpha")).toBe("alpha: n/a");
    expect(byStat("threshold")).toBe("threshold: 0.800 (F1 1.000)");
  });
});
