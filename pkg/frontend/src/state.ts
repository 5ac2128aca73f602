// View model for one coding screen: the ten rows under review plus the
// latest server-reported status, phase, and recall curve.

import type { BatchPayload, CurvePayload, SessionStatus } from "./api.js";

export type RowCode = "relevant" | "irrelevant" | "unset";

export interface ReviewRow {
  id: number;
  title: string;
  abstract: string;
  year: string;
  pdfLink: string;
  code: RowCode;
  submitted: boolean;
}

const CODE_TO_LABEL: Record<Exclude<RowCode, "unset">, "yes" | "no"> = {
  relevant: "yes",
  irrelevant: "no",
};

export class ReviewSession {
  rows: ReviewRow[] = [];
  status: SessionStatus | null = null;
  phase = "";
  exhausted = false;
  curve: [number, number][] = [];

  constructor(readonly id: string) {}

  applyBatch(payload: BatchPayload): void {
    this.phase = payload.phase;
    this.exhausted = payload.exhausted;
    this.rows = payload.studies.map((study) => ({
      id: study.id,
      title: study.title,
      abstract: study.abstract,
      year: study.year,
      pdfLink: study.pdf_link,
      code: "unset",
      submitted: false,
    }));
  }

  applyStatus(status: SessionStatus): void {
    this.status = status;
    this.phase = status.phase;
  }

  applyCurve(payload: CurvePayload): void {
    this.curve = payload.points.map(([coded, found]) => [coded, found]);
  }

  row(id: number): ReviewRow | undefined {
    return this.rows.find((row) => row.id === id);
  }

  /** Choosing a code (or changing it) makes the row submittable again. */
  chooseCode(id: number, code: Exclude<RowCode, "unset">): void {
    const row = this.row(id);
    if (!row) {
      throw new Error(`no row for study ${id}`);
    }
    if (row.code !== code) {
      row.code = code;
      row.submitted = false;
    }
  }

  /** Labels for every coded row not yet sent; uncoded rows stay uncoded. */
  pendingLabels(): Record<string, "yes" | "no"> {
    const labels: Record<string, "yes" | "no"> = {};
    for (const row of this.rows) {
      if (row.code !== "unset" && !row.submitted) {
        labels[String(row.id)] = CODE_TO_LABEL[row.code];
      }
    }
    return labels;
  }

  markSubmitted(ids: Iterable<string>): void {
    for (const id of ids) {
      const row = this.row(Number(id));
      if (row) {
        row.submitted = true;
      }
    }
  }

  hasPending(): boolean {
    return Object.keys(this.pendingLabels()).length > 0;
  }
}
