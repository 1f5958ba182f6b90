import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { GraphCanvasModel, layoutGraph } from "../src/graphView.js";
import { renderGraphCanvas } from "../src/views.js";
import { renderToString } from "../src/vnode.js";
import { fakeFetch, fixtureGraph } from "./fixtures.js";

const GRAPH_PATH = "/api/kg/graph-000001";

describe("graph layout", () => {
  it("places every node and edge from the payload", () => {
    const layout = layoutGraph(fixtureGraph());
    expect(layout.nodes).toHaveLength(4);
    expect(layout.edges).toHaveLength(2);
    for (const node of layout.nodes) {
      expect(node.x).toBeGreaterThanOrEqual(20);
      expect(node.x).toBeLessThanOrEqual(layout.width - 20);
      expect(node.y).toBeGreaterThanOrEqual(20);
      expect(node.y).toBeLessThanOrEqual(layout.height - 20);
    }
  });

  it("is deterministic for the same payload", () => {
    expect(layoutGraph(fixtureGraph())).toEqual(layoutGraph(fixtureGraph()));
  });

  it("renders one circle per node and one line per edge", () => {
    const html = renderToString(renderGraphCanvas(layoutGraph(fixtureGraph()), false));
    expect((html.match(/class="node"/g) ?? []).length).toBe(4);
    expect((html.match(/class="edge"/g) ?? []).length).toBe(2);
  });
});

describe("graph canvas mutations", () => {
  it("each edit issues one PATCH with the seen version", async () => {
    const graph = fixtureGraph();
    const { fetch, calls } = fakeFetch([
      { method: "GET", path: GRAPH_PATH, reply: graph },
      {
        method: "PATCH",
        path: GRAPH_PATH,
        reply: (body: any) => ({
          ...graph,
          version: graph.version + 1,
          nodes: [...graph.nodes, { key: "rivers", label: "Rivers" }],
        }),
      },
    ]);
    const canvas = new GraphCanvasModel(new ApiClient("", fetch), "graph-000001");
    await canvas.load();
    await canvas.addNode("Rivers");
    expect(calls).toHaveLength(2);
    expect(calls[1]?.body).toEqual({
      version: 3,
      mutation: "add_node",
      payload: { label: "Rivers" },
    });
    expect(canvas.graph?.version).toBe(4);
  });

  it("delete_node reflects the server cascade in the view", async () => {
    const graph = fixtureGraph();
    const afterDelete = {
      ...graph,
      version: graph.version + 1,
      nodes: graph.nodes.filter((n) => n.key !== "water cycle"),
      edges: [],
    };
    const { fetch } = fakeFetch([
      { method: "GET", path: GRAPH_PATH, reply: graph },
      { method: "PATCH", path: GRAPH_PATH, reply: afterDelete },
    ]);
    const canvas = new GraphCanvasModel(new ApiClient("", fetch), "graph-000001");
    await canvas.load();
    await canvas.deleteNode("water cycle");
    const layout = canvas.layout();
    expect(layout.nodes).toHaveLength(3);
    expect(layout.edges).toHaveLength(0);
  });

  it("a stale version gets a conflict flag and a reload offer", async () => {
    const { fetch } = fakeFetch([
      { method: "GET", path: GRAPH_PATH, reply: fixtureGraph() },
      {
        method: "PATCH",
        path: GRAPH_PATH,
        status: 409,
        reply: { error_code: "VersionConflict", message: "graph version is 5, caller expected 3" },
      },
    ]);
    const canvas = new GraphCanvasModel(new ApiClient("", fetch), "graph-000001");
    await canvas.load();
    await expect(canvas.addNode("X")).rejects.toThrow("version");
    expect(canvas.conflict).toBe(true);

    const html = renderToString(renderGraphCanvas(canvas.layout(), canvas.conflict));
    expect(html).toContain('data-action="reload-graph"');
  });

  it("reload clears the conflict", async () => {
    const { fetch } = fakeFetch([{ method: "GET", path: GRAPH_PATH, reply: fixtureGraph() }]);
    const canvas = new GraphCanvasModel(new ApiClient("", fetch), "graph-000001");
    await canvas.load();
    canvas.conflict = true;
    await canvas.load();
    expect(canvas.conflict).toBe(false);
  });

  it("exports pass through the export endpoint", async () => {
    const { fetch, calls } = fakeFetch([
      { method: "GET", path: GRAPH_PATH, reply: fixtureGraph() },
      {
        method: "GET",
        path: /export\?format=dot$/,
        reply: "digraph knowledge {}",
        text: true,
      },
    ]);
    const canvas = new GraphCanvasModel(new ApiClient("", fetch), "graph-000001");
    await canvas.load();
    await expect(canvas.exportDot()).resolves.toContain("digraph");
    expect(calls[1]?.path).toContain("/api/kg/graph-000001/export?format=dot");
  });
});
