/** Workspace store: server state projection plus uncommitted local edits.
 *
 * All business decisions stay on the server; every action here performs
 * exactly one API call and then replaces the relevant slice of state with the
 * server's response. Local prompt edits set the dirty marker until the manual
 * PUT commits them.
 */

import { ApiClient } from "./api.js";
import type {
  CurriculumInput,
  EvaluationReport,
  LessonPlan,
  Session,
  TemplateId,
} from "./types.js";
import { wizardSteps, WizardStep } from "./wizard.js";

export interface WorkspaceState {
  session: Session | null;
  plan: LessonPlan | null;
  report: EvaluationReport | null;
  /** Uncommitted per-template prompt edits (dirty until PUT .../manual). */
  pendingEdits: Partial<Record<TemplateId, string>>;
  busy: boolean;
  lastError: string | null;
}

export class WorkspaceStore {
  state: WorkspaceState = {
    session: null,
    plan: null,
    report: null,
    pendingEdits: {},
    busy: false,
    lastError: null,
  };

  constructor(readonly api: ApiClient) {}

  get dirty(): boolean {
    return Object.keys(this.state.pendingEdits).length > 0;
  }

  steps(): WizardStep[] {
    return wizardSteps(this.state.session);
  }

  private async run<T>(work: () => Promise<T>): Promise<T> {
    this.state.busy = true;
    this.state.lastError = null;
    try {
      return await work();
    } catch (error) {
      this.state.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    } finally {
      this.state.busy = false;
    }
  }

  async createSession(input: CurriculumInput): Promise<Session> {
    return this.run(async () => {
      const session = await this.api.createSession(input);
      this.state.session = session;
      this.state.plan = null;
      this.state.report = null;
      this.state.pendingEdits = {};
      return session;
    });
  }

  async refreshSession(): Promise<void> {
    const current = this.requireSession();
    await this.run(async () => {
      this.state.session = await this.api.getSession(current.session_id);
    });
  }

  private requireSession(): Session {
    if (!this.state.session) throw new Error("no active session");
    return this.state.session;
  }

  async generateHolistic(): Promise<void> {
    const session = this.requireSession();
    await this.run(async () => {
      const { prompts } = await this.api.generatePromptsHolistic(session.session_id);
      for (const prompt of prompts) {
        session.generated[prompt.template_id] = prompt;
      }
    });
  }

  async generateStepwise(templateId: TemplateId): Promise<void> {
    const session = this.requireSession();
    await this.run(async () => {
      const { prompt } = await this.api.generatePromptStepwise(session.session_id, templateId);
      session.generated[templateId] = prompt;
    });
  }

  async optimize(templateId: TemplateId): Promise<void> {
    const session = this.requireSession();
    await this.run(async () => {
      session.prompts[templateId] = await this.api.optimizePrompt(
        session.session_id,
        templateId,
      );
    });
  }

  /** Local edit only: marks the prompt dirty, no API call until commit. */
  stageManualEdit(templateId: TemplateId, text: string): void {
    this.state.pendingEdits[templateId] = text;
  }

  async commitManualEdit(templateId: TemplateId): Promise<void> {
    const session = this.requireSession();
    const text = this.state.pendingEdits[templateId];
    if (text === undefined) return;
    await this.run(async () => {
      session.prompts[templateId] = await this.api.saveManualEdit(
        session.session_id,
        templateId,
        text,
      );
      delete this.state.pendingEdits[templateId];
    });
  }

  async generatePlan(): Promise<LessonPlan> {
    const session = this.requireSession();
    return this.run(async () => {
      const plan = await this.api.generatePlan(session.session_id);
      this.state.plan = plan;
      session.plan_id = plan.id;
      return plan;
    });
  }

  async evaluate(): Promise<EvaluationReport> {
    const session = this.requireSession();
    return this.run(async () => {
      const report = await this.api.evaluateSessionPlan(session.session_id);
      this.state.report = report;
      session.report = report;
      return report;
    });
  }

  async buildGraph(): Promise<string> {
    const session = this.requireSession();
    if (!session.plan_id) throw new Error("generate a plan first");
    return this.run(async () => {
      const { graph_id } = await this.api.buildGraph(session.plan_id!, session.session_id);
      session.graph_id = graph_id;
      return graph_id;
    });
  }
}
