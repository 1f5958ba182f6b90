/** Guided design wizard: one step per template, gated along the dependency DAG.
 * A step unlocks only when its upstream prompt has been committed to the
 * session, mirroring the order the engine itself enforces.
 */

import type { Session, TemplateId } from "./types.js";

export const TEMPLATE_ORDER: TemplateId[] = [
  "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9",
];

export const UPSTREAM_OF: Partial<Record<TemplateId, TemplateId>> = {
  C5: "C4",
  C6: "C5",
  C7: "C5",
  C8: "C7",
  C9: "C7",
};

export const TEMPLATE_TITLES: Record<TemplateId, string> = {
  C1: "Case Background",
  C2: "Learner Analysis",
  C3: "Curriculum Standard Analysis",
  C4: "Instructional Content",
  C5: "Learning Objectives",
  C6: "Learning Assessment Design",
  C7: "Learning Activities and Design Rationale",
  C8: "Theoretical Foundation and Case Design Philosophy",
  C9: "Tools and Resources Selection",
};

export type StepStatus = "locked" | "ready" | "generated" | "optimized";

export interface WizardStep {
  templateId: TemplateId;
  title: string;
  upstream: TemplateId | null;
  status: StepStatus;
  stageBadge: "llm" | "manual" | null;
}

export function wizardSteps(session: Session | null): WizardStep[] {
  return TEMPLATE_ORDER.map((templateId) => {
    const upstream = UPSTREAM_OF[templateId] ?? null;
    const generated = session ? session.generated[templateId] : undefined;
    const optimized = session ? session.prompts[templateId] : undefined;

    let status: StepStatus;
    if (!session) {
      status = "locked";
    } else if (optimized) {
      status = "optimized";
    } else if (generated) {
      status = "generated";
    } else if (upstream === null || session.generated[upstream]) {
      status = "ready";
    } else {
      status = "locked";
    }

    const lastStage = optimized ? optimized.history[optimized.history.length - 1] : undefined;
    return {
      templateId,
      title: TEMPLATE_TITLES[templateId],
      upstream,
      status,
      stageBadge: lastStage ? lastStage[0] : null,
    };
  });
}

export function stepEnabled(steps: WizardStep[], templateId: TemplateId): boolean {
  const step = steps.find((s) => s.templateId === templateId);
  return step !== undefined && step.status !== "locked";
}
