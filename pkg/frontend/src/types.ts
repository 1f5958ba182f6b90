/** JSON contracts of the engine's HTTP API, mirrored verbatim. */

export type TemplateId = "C1" | "C2" | "C3" | "C4" | "C5" | "C6" | "C7" | "C8" | "C9";

export interface CurriculumInput {
  unit_theme: string;
  grade_level: string;
  primary_subject: string;
  supporting_subjects: string[];
  class_hours: number;
  textbook_version?: string;
  learner_notes?: string;
}

export interface GeneratedPrompt {
  template_id: TemplateId;
  text: string;
  upstream_id: TemplateId | null;
  input_fingerprint: string;
}

export type PromptStage = "llm" | "manual";

export interface OptimizedPrompt {
  original: string;
  llm_optimized: string;
  manual_final: string;
  history: [PromptStage, string][];
}

export interface Session {
  session_id: string;
  input: CurriculumInput;
  seed: number;
  generated: Partial<Record<TemplateId, GeneratedPrompt>>;
  prompts: Partial<Record<TemplateId, OptimizedPrompt>>;
  plan_id: string | null;
  report: EvaluationReport | null;
  graph_id: string | null;
  updated_at: string;
}

export interface LessonPlan {
  id: string;
  prompt_fingerprint: string;
  text: string;
  created_at: string;
}

export interface DimensionEntry {
  score: number;
  justification: string;
}

export interface EvaluationReport {
  plan_id: string;
  overall: number;
  entries: Record<string, DimensionEntry>;
}

export interface PlanSection {
  name: string;
  body: string;
}

export interface ActivityRow {
  section_name: string;
  driving_question: string;
  activity: string;
  assessment: string;
}

export interface StructuredPlan {
  plan_id: string;
  sections: PlanSection[];
  activity_rows: ActivityRow[];
  warnings: string[];
}

export interface SearchHit {
  file_id: string;
  ordinal: number;
  score: number;
  snippet: string;
}

export type AnswerSource = "knowledge_base" | "model_fallback";

export interface Answer {
  text: string;
  source: AnswerSource;
  cited_chunks: [string, number][];
}

export interface GraphNode {
  key: string;
  label: string;
}

export interface GraphEdge {
  subject_key: string;
  predicate: string;
  object_key: string;
  provenance: [string, number][];
}

export interface KnowledgeGraph {
  version: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export type GraphMutation =
  | { mutation: "add_node"; payload: { label: string } }
  | { mutation: "rename_node"; payload: { key: string; new_label: string } }
  | { mutation: "delete_node"; payload: { key: string } }
  | { mutation: "add_edge"; payload: { subject_key: string; predicate: string; object_key: string } }
  | {
      mutation: "update_edge";
      payload: {
        subject_key: string;
        predicate: string;
        object_key: string;
        new_subject_key?: string;
        new_predicate?: string;
        new_object_key?: string;
      };
    }
  | { mutation: "delete_edge"; payload: { subject_key: string; predicate: string; object_key: string } };

export interface ApiErrorBody {
  error_code: string;
  message: string;
}
