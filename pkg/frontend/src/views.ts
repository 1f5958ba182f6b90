/** Pure render functions: server state in, VNode tree out. */

import { DocumentChatModel, ChatMessage } from "./chat.js";
import { GraphLayout } from "./graphView.js";
import { radarChart } from "./radar.js";
import type {
  EvaluationReport,
  SearchHit,
  Session,
  StructuredPlan,
} from "./types.js";
import { h, VNode } from "./vnode.js";
import { WizardStep } from "./wizard.js";

export function renderWizard(steps: WizardStep[], dirty: boolean): VNode {
  return h(
    "section",
    { class: "wizard" },
    h("h2", {}, "Design steps"),
    dirty ? h("span", { class: "dirty-marker" }, "unsaved edits") : null,
    h(
      "ol",
      {},
      steps.map((step) =>
        h(
          "li",
          {
            class: `step step-${step.status}`,
            "data-template": step.templateId,
            "data-enabled": String(step.status !== "locked"),
          },
          h("span", { class: "step-title" }, `${step.templateId} ${step.title}`),
          step.stageBadge
            ? h("span", { class: `badge badge-${step.stageBadge}` }, step.stageBadge)
            : null,
          step.upstream ? h("span", { class: "upstream" }, `needs ${step.upstream}`) : null,
        ),
      ),
    ),
  );
}

export function renderPromptEditors(session: Session): VNode {
  const editors = Object.entries(session.prompts).map(([templateId, prompt]) =>
    h(
      "article",
      { class: "prompt-editor", "data-template": templateId },
      h("h3", {}, templateId),
      h(
        "div",
        { class: "stages" },
        prompt!.history.map(([stage], i) =>
          h("span", { class: `badge badge-${stage}`, "data-stage-index": String(i) }, stage),
        ),
      ),
      h("textarea", { "data-role": "manual-edit" }, prompt!.manual_final),
    ),
  );
  return h("section", { class: "prompt-editors" }, editors);
}

export function renderPlanTable(structure: StructuredPlan, dirty: boolean): VNode {
  return h(
    "section",
    { class: "plan-table" },
    h("h2", {}, "Structured plan"),
    dirty ? h("span", { class: "dirty-marker" }, "unsaved edits") : null,
    structure.warnings.length
      ? h(
          "ul",
          { class: "warnings" },
          structure.warnings.map((w) => h("li", {}, w)),
        )
      : null,
    h(
      "table",
      {},
      h(
        "thead",
        {},
        h(
          "tr",
          {},
          ["Section Name", "Driving Questions", "Activity", "Assessment"].map((c) =>
            h("th", {}, c),
          ),
        ),
      ),
      h(
        "tbody",
        {},
        structure.activity_rows.map((row, i) =>
          h(
            "tr",
            { "data-row-index": String(i) },
            h("td", {}, row.section_name),
            h("td", {}, row.driving_question),
            h("td", {}, row.activity),
            h("td", {}, row.assessment),
          ),
        ),
      ),
    ),
    h(
      "div",
      { class: "sections" },
      structure.sections.map((section) =>
        h(
          "details",
          { "data-section": section.name },
          h("summary", {}, section.name),
          h("textarea", { "data-role": "section-body" }, section.body),
        ),
      ),
    ),
  );
}

export function renderEvaluation(report: EvaluationReport | null): VNode {
  if (!report) {
    return h(
      "section",
      { class: "evaluation empty" },
      h("p", {}, "No evaluation yet."),
      h("button", { "data-action": "evaluate" }, "Evaluate this plan"),
    );
  }
  const chart = radarChart(report);
  return h(
    "section",
    { class: "evaluation" },
    h("h2", {}, `Overall ${report.overall.toFixed(2)}`),
    h(
      "svg",
      { viewBox: `0 0 ${chart.center * 2} ${chart.center * 2}`, class: "radar" },
      chart.rings.map((ring) => h("polygon", { points: ring, class: "ring" })),
      chart.axes.map((axis) =>
        h("line", {
          x1: String(chart.center),
          y1: String(chart.center),
          x2: axis.x.toFixed(1),
          y2: axis.y.toFixed(1),
          class: "axis",
          "data-axis": axis.key,
        }),
      ),
      h("polygon", { points: chart.polygon, class: "scores" }),
      chart.axes.map((axis) =>
        h(
          "text",
          { x: axis.labelX.toFixed(1), y: axis.labelY.toFixed(1), class: "axis-label" },
          axis.label,
        ),
      ),
    ),
    h(
      "dl",
      { class: "justifications" },
      chart.axes.flatMap((axis) => [
        h("dt", {}, `${axis.label} (${axis.score}/5)`),
        h("dd", {}, axis.justification),
      ]),
    ),
  );
}

export function renderSearchResults(hits: SearchHit[]): VNode {
  if (!hits.length) {
    return h("p", { class: "empty-state" }, "No matching documents.");
  }
  return h(
    "ul",
    { class: "search-results" },
    hits.map((hit) =>
      h(
        "li",
        { "data-file": hit.file_id, "data-ordinal": String(hit.ordinal) },
        h("span", { class: "score" }, hit.score.toFixed(3)),
        h("span", { class: "snippet" }, hit.snippet),
      ),
    ),
  );
}

export function renderChat(messages: ChatMessage[]): VNode {
  return h(
    "section",
    { class: "chat" },
    messages.map((message) => {
      const badge = DocumentChatModel.badge(message);
      return h(
        "div",
        { class: `message message-${message.role}${message.pending ? " pending" : ""}` },
        h("p", {}, message.text),
        badge ? h("span", { class: "badge badge-source" }, badge) : null,
        message.citations.length
          ? h(
              "ul",
              { class: "citations" },
              message.citations.map((c) =>
                h(
                  "li",
                  {},
                  h(
                    "a",
                    { href: `#${DocumentChatModel.citationAnchor(c)}` },
                    `chunk ${c[1]}`,
                  ),
                ),
              ),
            )
          : null,
      );
    }),
  );
}

export function renderGraphCanvas(layout: GraphLayout, conflict: boolean): VNode {
  return h(
    "section",
    { class: "graph-canvas" },
    conflict
      ? h(
          "div",
          { class: "conflict" },
          h("p", {}, "The graph changed on the server."),
          h("button", { "data-action": "reload-graph" }, "Reload"),
        )
      : null,
    h(
      "svg",
      { viewBox: `0 0 ${layout.width} ${layout.height}`, class: "graph" },
      layout.edges.map((edge) =>
        h("line", {
          x1: edge.x1.toFixed(1),
          y1: edge.y1.toFixed(1),
          x2: edge.x2.toFixed(1),
          y2: edge.y2.toFixed(1),
          class: "edge",
          "data-edge": `${edge.subject_key}|${edge.predicate}|${edge.object_key}`,
        }),
      ),
      layout.nodes.flatMap((node) => [
        h("circle", {
          cx: node.x.toFixed(1),
          cy: node.y.toFixed(1),
          r: "14",
          class: "node",
          "data-node": node.key,
        }),
        h(
          "text",
          { x: node.x.toFixed(1), y: (node.y - 18).toFixed(1), class: "node-label" },
          node.label,
        ),
      ]),
    ),
  );
}

export function renderWorkspace(args: {
  steps: WizardStep[];
  session: Session | null;
  structure: StructuredPlan | null;
  report: EvaluationReport | null;
  graphLayout: GraphLayout | null;
  chat: ChatMessage[];
  dirty: boolean;
  graphConflict: boolean;
}): VNode {
  return h(
    "main",
    { class: "workspace" },
    renderWizard(args.steps, args.dirty),
    args.session ? renderPromptEditors(args.session) : h("p", {}, "Create a session to begin."),
    args.structure ? renderPlanTable(args.structure, args.dirty) : null,
    renderEvaluation(args.report),
    args.chat.length ? renderChat(args.chat) : null,
    args.graphLayout ? renderGraphCanvas(args.graphLayout, args.graphConflict) : null,
  );
}
