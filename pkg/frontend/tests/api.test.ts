import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { FakeServer } from "./fakeServer.js";

function client(server: FakeServer): ApiClient {
  return new ApiClient("", server.fetch);
}

describe("ApiClient", () => {
  it("returns null when the queue is empty", async () => {
    const api = client(new FakeServer());
    expect(await api.nextTask("ann1")).toBeNull();
  });

  it("fetches, submits, and reflects progress in stats", async () => {
    const server = new FakeServer();
    server.enqueue("match_binary", [
      { item_id: "p1", teaser: "t", article: "a" },
      { item_id: "p2", teaser: "t", article: "a" },
    ]);
    const api = client(server);

    const task = await api.nextTask("ann1");
    expect(task).not.toBeNull();
    expect(task!.kind).toBe("match_binary");
    await api.submitJudgment("ann1", task!.id, { match: 1 });

    const stats = await api.stats();
    expect(stats.progress).toEqual({ done: 1, total: 2 });
  });

  it("surfaces service error codes", async () => {
    const api = client(new FakeServer());
    await expect(
      api.submitJudgment("ann1", "ghost~1", { match: 1 }),
    ).rejects.toMatchObject({ status: 409, error: "not-assigned" });
  });

  it("rejects incomplete quality judgments", async () => {
    const server = new FakeServer();
    server.enqueue("quality_1_5", [{ item_id: "q1", summary: "s" }]);
    const api = client(server);
    const task = await api.nextTask("ann1");
    await expect(
      api.submitJudgment("ann1", task!.id, { coherence: 3 }),
    ).rejects.toMatchObject({ status: 422, error: "incomplete-values" });
  });

  it("exports newline-delimited records", async () => {
    const server = new FakeServer();
    server.enqueue("match_binary", [{ item_id: "p1", teaser: "t" }]);
    const api = client(server);
    const task = await api.nextTask("ann1");
    await api.submitJudgment("ann1", task!.id, { match: 0 });
    const lines = (await api.exportRecords()).trim().split("\n");
    expect(lines).toHaveLength(1);
    expect(JSON.parse(lines[0])).toMatchObject({
      annotator_id: "ann1",
      item_id: "p1",
      task: "match_binary",
      value: 0,
    });
  });
});
