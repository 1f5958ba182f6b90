/** Knowledge-graph canvas view-model.
 *
 * Layout runs a small deterministic force simulation (ring start, repulsion +
 * springs + centering, fixed iteration count) so snapshots are stable; node
 * positions are client-side only and never persisted. Every canvas mutation
 * is one PATCH carrying the last seen version; a 409 flags a conflict and the
 * UI offers a reload instead of retrying blindly.
 */

import { ApiClient, ApiError } from "./api.js";
import type { GraphMutation, KnowledgeGraph } from "./types.js";

export interface PlacedNode {
  key: string;
  label: string;
  x: number;
  y: number;
}

export interface PlacedEdge {
  subject_key: string;
  object_key: string;
  predicate: string;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface GraphLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  width: number;
  height: number;
}

const ITERATIONS = 120;
const REPULSION = 12000;
const SPRING = 0.02;
const SPRING_LENGTH = 90;
const CENTER_PULL = 0.01;

export function layoutGraph(graph: KnowledgeGraph, width = 640, height = 480): GraphLayout {
  const nodes = [...graph.nodes].sort((a, b) => (a.key < b.key ? -1 : 1));
  const index = new Map(nodes.map((node, i) => [node.key, i]));
  const n = nodes.length;
  const cx = width / 2;
  const cy = height / 2;

  const xs = new Array<number>(n);
  const ys = new Array<number>(n);
  const ringRadius = Math.min(width, height) / 3;
  for (let i = 0; i < n; i++) {
    const angle = (2 * Math.PI * i) / Math.max(n, 1);
    xs[i] = cx + ringRadius * Math.cos(angle);
    ys[i] = cy + ringRadius * Math.sin(angle);
  }

  const springs: [number, number][] = [];
  for (const edge of graph.edges) {
    const a = index.get(edge.subject_key);
    const b = index.get(edge.object_key);
    if (a !== undefined && b !== undefined && a !== b) springs.push([a, b]);
  }

  for (let step = 0; step < ITERATIONS; step++) {
    const fx = new Array<number>(n).fill(0);
    const fy = new Array<number>(n).fill(0);
    for (let i = 0; i < n; i++) {
      for (let j = i + 1; j < n; j++) {
        let dx = xs[i]! - xs[j]!;
        let dy = ys[i]! - ys[j]!;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          // Coincident nodes get a deterministic nudge along the index axis.
          dx = 1;
          dy = (i - j) * 0.5;
          d2 = dx * dx + dy * dy;
        }
        const force = REPULSION / d2;
        const d = Math.sqrt(d2);
        fx[i]! += (dx / d) * force;
        fy[i]! += (dy / d) * force;
        fx[j]! -= (dx / d) * force;
        fy[j]! -= (dy / d) * force;
      }
    }
    for (const [a, b] of springs) {
      const dx = xs[b]! - xs[a]!;
      const dy = ys[b]! - ys[a]!;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const stretch = SPRING * (d - SPRING_LENGTH);
      fx[a]! += (dx / d) * stretch * d;
      fy[a]! += (dy / d) * stretch * d;
      fx[b]! -= (dx / d) * stretch * d;
      fy[b]! -= (dy / d) * stretch * d;
    }
    const damping = 0.85 ** step + 0.02;
    for (let i = 0; i < n; i++) {
      fx[i]! += (cx - xs[i]!) * CENTER_PULL * Math.min(1, n / 4);
      fy[i]! += (cy - ys[i]!) * CENTER_PULL * Math.min(1, n / 4);
      xs[i] = Math.min(width - 20, Math.max(20, xs[i]! + fx[i]! * 0.01 * damping));
      ys[i] = Math.min(height - 20, Math.max(20, ys[i]! + fy[i]! * 0.01 * damping));
    }
  }

  const placed: PlacedNode[] = nodes.map((node, i) => ({
    key: node.key,
    label: node.label,
    x: Math.round(xs[i]! * 10) / 10,
    y: Math.round(ys[i]! * 10) / 10,
  }));
  const byKey = new Map(placed.map((p) => [p.key, p]));
  const edges: PlacedEdge[] = graph.edges.map((edge) => {
    const a = byKey.get(edge.subject_key)!;
    const b = byKey.get(edge.object_key)!;
    return {
      subject_key: edge.subject_key,
      object_key: edge.object_key,
      predicate: edge.predicate,
      x1: a.x,
      y1: a.y,
      x2: b.x,
      y2: b.y,
    };
  });
  return { nodes: placed, edges, width, height };
}

export class GraphCanvasModel {
  graph: KnowledgeGraph | null = null;
  conflict = false;
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly graphId: string,
  ) {}

  async load(): Promise<void> {
    this.graph = await this.api.getGraph(this.graphId);
    this.conflict = false;
    this.lastError = null;
  }

  layout(width = 640, height = 480): GraphLayout {
    if (!this.graph) throw new Error("graph not loaded");
    return layoutGraph(this.graph, width, height);
  }

  /** One mutation, one PATCH. A stale version sets the conflict flag. */
  private async mutate(mutation: GraphMutation): Promise<void> {
    if (!this.graph) throw new Error("graph not loaded");
    this.lastError = null;
    try {
      this.graph = await this.api.patchGraph(this.graphId, this.graph.version, mutation);
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        this.conflict = true;
      }
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    }
  }

  addNode(label: string): Promise<void> {
    return this.mutate({ mutation: "add_node", payload: { label } });
  }

  renameNode(key: string, newLabel: string): Promise<void> {
    return this.mutate({ mutation: "rename_node", payload: { key, new_label: newLabel } });
  }

  deleteNode(key: string): Promise<void> {
    return this.mutate({ mutation: "delete_node", payload: { key } });
  }

  addEdge(subjectKey: string, predicate: string, objectKey: string): Promise<void> {
    return this.mutate({
      mutation: "add_edge",
      payload: { subject_key: subjectKey, predicate, object_key: objectKey },
    });
  }

  deleteEdge(subjectKey: string, predicate: string, objectKey: string): Promise<void> {
    return this.mutate({
      mutation: "delete_edge",
      payload: { subject_key: subjectKey, predicate, object_key: objectKey },
    });
  }

  exportJson(): Promise<string> {
    return this.api.exportGraph(this.graphId, "json");
  }

  exportDot(): Promise<string> {
    return this.api.exportGraph(this.graphId, "dot");
  }
}
