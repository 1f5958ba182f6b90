/** Typed client for the engine API.
 *
 * Every method issues exactly one HTTP request and records it in the audit
 * log, which the component tests use to prove that each UI mutation maps to
 * one documented API call.
 */

import type {
  ActivityRow,
  Answer,
  ApiErrorBody,
  CurriculumInput,
  EvaluationReport,
  GeneratedPrompt,
  GraphMutation,
  KnowledgeGraph,
  LessonPlan,
  OptimizedPrompt,
  PlanSection,
  SearchHit,
  Session,
  StructuredPlan,
  TemplateId,
} from "./types.js";

export interface AuditEntry {
  method: string;
  path: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorCode: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  readonly audit: AuditEntry[] = [];

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    this.audit.push({ method, path });
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let parsed: ApiErrorBody = { error_code: "HttpError", message: `HTTP ${response.status}` };
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        // non-JSON error body; keep the generic shape
      }
      throw new ApiError(response.status, parsed.error_code, parsed.message);
    }
    return (await response.json()) as T;
  }

  private async requestText(method: string, path: string): Promise<string> {
    this.audit.push({ method, path });
    const response = await this.fetchImpl(this.baseUrl + path, { method });
    if (!response.ok) {
      throw new ApiError(response.status, "HttpError", `HTTP ${response.status}`);
    }
    return response.text();
  }

  // -- sessions ------------------------------------------------------------

  createSession(input: CurriculumInput, seed?: number): Promise<Session> {
    return this.request("POST", "/api/sessions", { input, seed });
  }

  getSession(sessionId: string): Promise<Session> {
    return this.request("GET", `/api/sessions/${sessionId}`);
  }

  generatePromptsHolistic(sessionId: string): Promise<{ prompts: GeneratedPrompt[] }> {
    return this.request("POST", `/api/sessions/${sessionId}/prompts`, { mode: "holistic" });
  }

  generatePromptStepwise(
    sessionId: string,
    templateId: TemplateId,
  ): Promise<{ prompt: GeneratedPrompt }> {
    return this.request("POST", `/api/sessions/${sessionId}/prompts`, {
      mode: "stepwise",
      template_id: templateId,
    });
  }

  optimizePrompt(sessionId: string, templateId: TemplateId): Promise<OptimizedPrompt> {
    return this.request("POST", `/api/sessions/${sessionId}/prompts/${templateId}/optimize`, {});
  }

  saveManualEdit(
    sessionId: string,
    templateId: TemplateId,
    text: string,
  ): Promise<OptimizedPrompt> {
    return this.request("PUT", `/api/sessions/${sessionId}/prompts/${templateId}/manual`, {
      text,
    });
  }

  generatePlan(sessionId: string, templateIds?: TemplateId[]): Promise<LessonPlan> {
    return this.request("POST", `/api/sessions/${sessionId}/plan`, {
      template_ids: templateIds,
    });
  }

  evaluateSessionPlan(sessionId: string): Promise<EvaluationReport> {
    return this.request("POST", `/api/sessions/${sessionId}/evaluate`, {});
  }

  getPlan(planId: string): Promise<LessonPlan> {
    return this.request("GET", `/api/plans/${planId}`);
  }

  // -- case library -----------------------------------------------------------

  searchLibrary(
    query: string,
    filters: { subject?: string; grade_band?: string; keywords?: string[] } = {},
    topK = 5,
  ): Promise<{ results: SearchHit[] }> {
    const params = new URLSearchParams({ q: query, top_k: String(topK) });
    if (filters.subject) params.set("subject", filters.subject);
    if (filters.grade_band) params.set("grade_band", filters.grade_band);
    if (filters.keywords?.length) params.set("keywords", filters.keywords.join(","));
    return this.request("GET", `/api/library/search?${params.toString()}`);
  }

  askDocument(fileId: string, question: string): Promise<Answer> {
    return this.request("POST", `/api/library/documents/${fileId}/qa`, { question });
  }

  // -- structured plan ----------------------------------------------------------

  getStructure(planId: string): Promise<StructuredPlan> {
    return this.request("GET", `/api/plans/${planId}/structure`);
  }

  putStructure(
    planId: string,
    sections: PlanSection[],
    rows: ActivityRow[],
  ): Promise<StructuredPlan> {
    return this.request("PUT", `/api/plans/${planId}/structure`, {
      sections,
      activity_rows: rows,
    });
  }

  addRow(planId: string, row: ActivityRow, index: number): Promise<StructuredPlan> {
    return this.request("POST", `/api/plans/${planId}/structure/rows`, {
      op: "add",
      row,
      index,
    });
  }

  deleteRow(planId: string, index: number): Promise<StructuredPlan> {
    return this.request("POST", `/api/plans/${planId}/structure/rows`, {
      op: "delete",
      index,
    });
  }

  resetRows(planId: string): Promise<StructuredPlan> {
    return this.request("POST", `/api/plans/${planId}/structure/rows`, { op: "reset" });
  }

  exportStructure(planId: string, format: "markdown" | "json"): Promise<string> {
    return this.requestText("GET", `/api/plans/${planId}/structure/export?format=${format}`);
  }

  // -- knowledge graph -------------------------------------------------------------

  buildGraph(planId: string, sessionId?: string): Promise<{ graph_id: string }> {
    return this.request("POST", `/api/plans/${planId}/kg`, { session_id: sessionId });
  }

  getGraph(graphId: string): Promise<KnowledgeGraph> {
    return this.request("GET", `/api/kg/${graphId}`);
  }

  patchGraph(
    graphId: string,
    version: number,
    mutation: GraphMutation,
  ): Promise<KnowledgeGraph> {
    return this.request("PATCH", `/api/kg/${graphId}`, { version, ...mutation });
  }

  exportGraph(graphId: string, format: "json" | "dot"): Promise<string> {
    return this.requestText("GET", `/api/kg/${graphId}/export?format=${format}`);
  }
}
