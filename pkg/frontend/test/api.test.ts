import { describe, expect, it } from "vitest";

import { ApiError, ForgeClient } from "../src/api.js";
import { mockFetch } from "./helpers.js";

describe("client request mapping", () => {
  it("hits the documented endpoints with the right bodies", async () => {
    const { fetcher, calls } = mockFetch({
      "GET /params/preview": () => ({ r: 2, m: 555, cap: 1, over_cap: false, beta_warning: false }),
      "POST /datasets": () => ({ id: "d1", subjects: 2, dimensions: 3 }),
      "POST /sessions/s1/runs": () => ({ run: "r1", status: "queued" }),
      "POST /sessions/s1/cut": (_p, body) => ({ height: (body as { height: number }).height, sets: [] }),
      "POST /sessions/s1/protos": () => ({ name: "P", sources: [], members: [], dims: [] }),
      "POST /sessions": () => ({ id: "s1" }),
      "GET /sessions/s1/radar": () => ({ axes: [], series: [] }),
      "GET /sessions/s1/report": () => "# report",
    });
    const client = new ForgeClient("", fetcher);

    await client.paramsPreview(47, 0.25, 0.1);
    await client.uploadDataset("subject,d1\na,0.5\n");
    await client.createSession("d1");
    await client.startRun("s1", { w: 0.3, alpha: 0.1, beta: 0.45, seed: 7 });
    await client.cut("s1", 0.5);
    await client.previewProto("s1", ["A45"]);
    await client.radar("s1", "A45", "B45");
    const report = await client.report("s1");

    expect(report).toBe("# report");
    expect(calls[0].path).toBe("/params/preview?dims=47&beta=0.25&alpha=0.1");
    expect(calls[1].body).toBe("subject,d1\na,0.5\n");
    expect(calls[2].body).toEqual({ dataset: "d1" });
    expect(calls[3].body).toEqual({ w: 0.3, alpha: 0.1, beta: 0.45, seed: 7 });
    expect(calls[4].body).toEqual({ height: 0.5 });
    expect(calls[5].body).toEqual({ set: ["A45"], vetoed_dims: [], name: "", preview: true });
    expect(calls[6].path).toContain("a=A45&b=B45");
  });

  it("raises ApiError with the payload on failure", async () => {
    const fetcher = (async () => new Response(
      JSON.stringify({ error: { type: "ParameterError", message: "r too large" } }),
      { status: 422 })) as typeof fetch;
    const client = new ForgeClient("", fetcher);
    await expect(client.startRun("s1", { w: 0.3, alpha: 0.1, beta: 0.95, seed: 1 }))
      .rejects.toSatisfy((err: unknown) =>
        err instanceof ApiError && err.status === 422 &&
        JSON.stringify(err.payload).includes("r too large"));
  });
});
