/** Browser entry point: wires the stores to the DOM and re-renders on change. */

import { ApiClient } from "./api.js";
import { DocumentChatModel } from "./chat.js";
import { download, mount } from "./dom.js";
import { GraphCanvasModel } from "./graphView.js";
import { PlanTableModel } from "./planTable.js";
import { WorkspaceStore } from "./store.js";
import type { CurriculumInput, TemplateId } from "./types.js";
import { renderWorkspace } from "./views.js";

export class App {
  readonly api = new ApiClient("");
  readonly store = new WorkspaceStore(this.api);
  planTable: PlanTableModel | null = null;
  graphCanvas: GraphCanvasModel | null = null;
  chat: DocumentChatModel | null = null;

  constructor(private readonly root: Element) {}

  render(): void {
    mount(
      this.root,
      renderWorkspace({
        steps: this.store.steps(),
        session: this.store.state.session,
        structure: this.planTable?.structure ?? null,
        report: this.store.state.report,
        graphLayout: this.graphCanvas?.graph ? this.graphCanvas.layout() : null,
        chat: this.chat?.messages ?? [],
        dirty: this.store.dirty || (this.planTable?.dirty ?? false),
        graphConflict: this.graphCanvas?.conflict ?? false,
      }),
    );
  }

  async startSession(input: CurriculumInput): Promise<void> {
    await this.store.createSession(input);
    this.render();
  }

  async runHolistic(): Promise<void> {
    await this.store.generateHolistic();
    this.render();
  }

  async runStep(templateId: TemplateId): Promise<void> {
    await this.store.generateStepwise(templateId);
    this.render();
  }

  async generateAndOpenPlan(): Promise<void> {
    const plan = await this.store.generatePlan();
    this.planTable = new PlanTableModel(this.api, plan.id);
    await this.planTable.load();
    this.render();
  }

  async evaluate(): Promise<void> {
    await this.store.evaluate();
    this.render();
  }

  async buildGraph(): Promise<void> {
    const graphId = await this.store.buildGraph();
    this.graphCanvas = new GraphCanvasModel(this.api, graphId);
    await this.graphCanvas.load();
    this.render();
  }

  openChat(fileId: string): void {
    this.chat = new DocumentChatModel(this.api, fileId);
    this.render();
  }

  async exportPlanMarkdown(): Promise<void> {
    if (!this.planTable) return;
    download("plan.md", await this.planTable.exportMarkdown(), "text/markdown");
  }

  async exportGraphJson(): Promise<void> {
    if (!this.graphCanvas) return;
    download("graph.json", await this.graphCanvas.exportJson(), "application/json");
  }
}

declare global {
  interface Window {
    planforge?: App;
  }
}

if (typeof document !== "undefined") {
  const root = document.getElementById("app");
  if (root) {
    const app = new App(root);
    app.render();
    window.planforge = app;
  }
}
