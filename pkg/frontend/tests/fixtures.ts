/** Golden fixtures mirroring engine responses, plus a scripted fetch. */

import type { FetchLike } from "../src/api.js";
import type {
  EvaluationReport,
  KnowledgeGraph,
  Session,
  StructuredPlan,
} from "../src/types.js";

export const DIMENSION_KEYS = [
  "rationality",
  "comprehensiveness",
  "interdisciplinarity",
  "authenticity",
  "scientific_rigor",
  "activity_challenge",
  "organizational_effectiveness",
  "appropriateness_of_support",
  "comprehensiveness_of_outcomes",
  "overall_completeness",
  "consistency",
] as const;

export function fixtureReport(): EvaluationReport {
  const entries: EvaluationReport["entries"] = {};
  DIMENSION_KEYS.forEach((key, i) => {
    entries[key] = { score: 3 + (i % 3), justification: `judged ${key}` };
  });
  return { plan_id: "plan-000001", overall: 3.91, entries };
}

export function fixtureSession(): Session {
  return {
    session_id: "session-000001",
    input: {
      unit_theme: "Water Cycle",
      grade_level: "Grade 5",
      primary_subject: "Science",
      supporting_subjects: ["Geography", "Art"],
      class_hours: 6,
    },
    seed: 42,
    generated: {
      C1: { template_id: "C1", text: "prompt one", upstream_id: null, input_fingerprint: "f" },
      C2: { template_id: "C2", text: "prompt two", upstream_id: null, input_fingerprint: "f" },
      C3: { template_id: "C3", text: "prompt three", upstream_id: null, input_fingerprint: "f" },
      C4: { template_id: "C4", text: "prompt four", upstream_id: null, input_fingerprint: "f" },
      C5: { template_id: "C5", text: "prompt five", upstream_id: "C4", input_fingerprint: "f" },
    },
    prompts: {
      C1: {
        original: "prompt one",
        llm_optimized: "better prompt one",
        manual_final: "better prompt one, trimmed",
        history: [
          ["llm", "better prompt one"],
          ["manual", "better prompt one, trimmed"],
        ],
      },
    },
    plan_id: "plan-000001",
    report: null,
    graph_id: "graph-000001",
    updated_at: "2026-08-11T00:00:00+00:00",
  };
}

export function fixtureStructure(): StructuredPlan {
  return {
    plan_id: "plan-000001",
    sections: [
      { name: "Case Background", body: "Weather around the school." },
      { name: "Learning Activities and Design Rationale", body: "Hands-on work." },
    ],
    activity_rows: [
      {
        section_name: "Case Background",
        driving_question: "Where does a puddle go?",
        activity: "Evaporation race",
        assessment: "Observation log",
      },
      {
        section_name: "(unassigned)",
        driving_question: "How do clouds form?",
        activity: "Cloud in a jar",
        assessment: "Exit ticket",
      },
    ],
    warnings: [],
  };
}

export function fixtureGraph(): KnowledgeGraph {
  return {
    version: 3,
    nodes: [
      { key: "art", label: "Art" },
      { key: "evaporation", label: "Evaporation" },
      { key: "geography", label: "Geography" },
      { key: "water cycle", label: "Water Cycle" },
    ],
    edges: [
      {
        subject_key: "evaporation",
        predicate: "is part of",
        object_key: "water cycle",
        provenance: [["plan-000001", 0]],
      },
      {
        subject_key: "water cycle",
        predicate: "connects",
        object_key: "geography",
        provenance: [["plan-000001", 0]],
      },
    ],
  };
}

export interface ScriptedCall {
  method: string;
  path: string;
  body?: unknown;
}

export interface FakeRoute {
  method: string;
  path: string | RegExp;
  status?: number;
  reply: unknown | ((body: unknown) => unknown);
  text?: boolean;
}

/** Fetch double: answers from the route table and records every request. */
export function fakeFetch(routes: FakeRoute[]): { fetch: FetchLike; calls: ScriptedCall[] } {
  const calls: ScriptedCall[] = [];
  const fetchImpl: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ method, path: url, body });
    const route = routes.find(
      (r) =>
        r.method === method &&
        (typeof r.path === "string" ? r.path === url : r.path.test(url)),
    );
    if (!route) {
      return new Response(JSON.stringify({ error_code: "UnknownRoute", message: url }), {
        status: 404,
        headers: { "Content-Type": "application/json" },
      });
    }
    const payload = typeof route.reply === "function" ? (route.reply as any)(body) : route.reply;
    const status = route.status ?? 200;
    if (route.text) {
      return new Response(String(payload), { status });
    }
    return new Response(JSON.stringify(payload), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { fetch: fetchImpl, calls };
}
