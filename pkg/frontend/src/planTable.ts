/** Plan table editor view-model.
 *
 * Row edits are optimistic: the local copy updates immediately, the matching
 * API call follows, and a 4xx/5xx rolls the local copy back. Section text
 * edits stay local (dirty) until saved with one PUT.
 */

import { ApiClient } from "./api.js";
import type { ActivityRow, StructuredPlan } from "./types.js";

export class PlanTableModel {
  structure: StructuredPlan | null = null;
  dirty = false;
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly planId: string,
  ) {}

  async load(): Promise<void> {
    this.structure = await this.api.getStructure(this.planId);
    this.dirty = false;
  }

  private requireStructure(): StructuredPlan {
    if (!this.structure) throw new Error("structure not loaded");
    return this.structure;
  }

  /** Optimistically apply a row mutation; roll back if the server refuses. */
  private async optimistic(
    apply: (rows: ActivityRow[]) => ActivityRow[],
    commit: () => Promise<StructuredPlan>,
  ): Promise<void> {
    const before = this.requireStructure();
    this.structure = { ...before, activity_rows: apply([...before.activity_rows]) };
    this.lastError = null;
    try {
      this.structure = await commit();
    } catch (error) {
      this.structure = before;
      this.lastError = error instanceof Error ? error.message : String(error);
      throw error;
    }
  }

  addRow(row: ActivityRow, index: number): Promise<void> {
    return this.optimistic(
      (rows) => {
        rows.splice(index, 0, row);
        return rows;
      },
      () => this.api.addRow(this.planId, row, index),
    );
  }

  deleteRow(index: number): Promise<void> {
    return this.optimistic(
      (rows) => {
        rows.splice(index, 1);
        return rows;
      },
      () => this.api.deleteRow(this.planId, index),
    );
  }

  resetRows(): Promise<void> {
    return this.optimistic(
      (rows) => rows,
      () => this.api.resetRows(this.planId),
    );
  }

  /** Local section edit; marks the workspace dirty until saved. */
  editSectionBody(name: string, body: string): void {
    const structure = this.requireStructure();
    this.structure = {
      ...structure,
      sections: structure.sections.map((s) => (s.name === name ? { ...s, body } : s)),
    };
    this.dirty = true;
  }

  async saveSections(): Promise<void> {
    const structure = this.requireStructure();
    this.structure = await this.api.putStructure(
      this.planId,
      structure.sections,
      [...structure.activity_rows],
    );
    this.dirty = false;
  }

  exportMarkdown(): Promise<string> {
    return this.api.exportStructure(this.planId, "markdown");
  }
}
