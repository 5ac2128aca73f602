// Screen controller: one session, one coding table, one plot. All
// mutations funnel through a single in-flight guard so double clicks
// cannot double-submit, and batch fetches abort their predecessors.

import { ApiError, ReviewApi } from "./api.js";
import type { CreateSessionRequest, SessionStatus } from "./api.js";
import { ReviewSession } from "./state.js";
import type { RowCode } from "./state.js";
import {
  hideToast,
  renderPhase,
  renderStatusLine,
  renderTable,
  showToast,
} from "./render.js";
import { renderPlot } from "./plot.js";

export interface AppOptions {
  base?: string;
  enableRestart?: boolean;
  fetchFn?: typeof fetch;
}

const SHELL = `
<section id="setup-panel">
  <h1>Candidate study screening</h1>
  <form id="setup-form">
    <label>corpus CSV
      <textarea id="csv-input" rows="4" placeholder="Document Title,Abstract,Year,PDF Link"></textarea>
    </label>
    <label class="file-row">or load a file
      <input id="file-input" type="file" accept=".csv,text/csv">
    </label>
    <label>or a workspace dataset <input id="dataset-input" type="text"></label>
    <label>session name <input id="name-input" type="text" value="upload"></label>
    <label>treatment <input id="treatment-input" type="text" value="HUTM"></label>
    <label>seed <input id="seed-input" type="number"></label>
    <button id="create-button" type="submit">start review</button>
    <span id="setup-error" role="alert"></span>
  </form>
</section>
<section id="review-panel" hidden>
  <header class="review-header">
    <span id="status-line"></span>
    <span id="phase-badge" class="phase-badge"></span>
    <a id="export-link" href="#">export</a>
    <button id="restart-button" type="button" hidden>restart</button>
  </header>
  <div id="completion-banner" hidden>
    Every candidate study has been coded. Export the results above.
  </div>
  <div id="toast" role="alert" hidden></div>
  <label class="search-row">highlight
    <input id="search-input" type="search" placeholder="term to mark in abstracts">
  </label>
  <table id="coding-table">
    <thead>
      <tr><th>study</th><th>year</th><th>code</th><th></th></tr>
    </thead>
    <tbody id="coding-body"></tbody>
  </table>
  <button id="next-button" type="button">Submit coded rows + Next</button>
  <section class="plot-section">
    <label><input id="autoplot-toggle" type="checkbox" checked> Auto Plot</label>
    <button id="plot-button" type="button">Plot</button>
    <div id="plot-container"></div>
  </section>
</section>
`;

export class App {
  private readonly api: ReviewApi;
  private readonly enableRestart: boolean;
  private session: ReviewSession | null = null;
  private searchQuery = "";
  private autoPlot = true;
  private mutationInFlight = false;
  private batchAbort: AbortController | null = null;
  private root!: HTMLElement;
  private doc!: Document;

  constructor(options: AppOptions = {}) {
    this.api = new ReviewApi(options.base ?? "", options.fetchFn);
    this.enableRestart = options.enableRestart ?? false;
  }

  mount(root: HTMLElement): void {
    this.root = root;
    this.doc = root.ownerDocument;
    root.innerHTML = SHELL;

    this.element<HTMLFormElement>("setup-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createSession();
    });
    this.element<HTMLInputElement>("file-input").addEventListener("change", (event) => {
      void this.readFileIntoTextarea(event);
    });
    this.element<HTMLButtonElement>("next-button").addEventListener("click", () => {
      void this.submitAndNext();
    });
    this.element<HTMLInputElement>("search-input").addEventListener("input", (event) => {
      this.searchQuery = (event.target as HTMLInputElement).value;
      this.renderRows();
    });
    this.element<HTMLInputElement>("autoplot-toggle").addEventListener("change", (event) => {
      this.autoPlot = (event.target as HTMLInputElement).checked;
    });
    this.element<HTMLButtonElement>("plot-button").addEventListener("click", () => {
      void this.refreshPlot();
    });
    const restart = this.element<HTMLButtonElement>("restart-button");
    restart.hidden = !this.enableRestart;
    restart.addEventListener("click", () => {
      void this.restart();
    });
    renderPlot(this.element("plot-container"), []);
  }

  private element<T extends HTMLElement = HTMLElement>(id: string): T {
    const found = this.doc.getElementById(id);
    if (!found) {
      throw new Error(`missing element #${id}`);
    }
    return found as T;
  }

  private async readFileIntoTextarea(event: Event): Promise<void> {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) {
      this.element<HTMLTextAreaElement>("csv-input").value = await file.text();
    }
  }

  private async createSession(): Promise<void> {
    const errorEl = this.element("setup-error");
    errorEl.textContent = "";
    const csv = this.element<HTMLTextAreaElement>("csv-input").value;
    const dataset = this.element<HTMLInputElement>("dataset-input").value.trim();
    const name = this.element<HTMLInputElement>("name-input").value.trim();
    const treatment = this.element<HTMLInputElement>("treatment-input").value.trim();
    const seedText = this.element<HTMLInputElement>("seed-input").value.trim();

    const request: CreateSessionRequest = {};
    if (csv.trim()) {
      request.csv = csv;
    }
    if (dataset) {
      request.dataset = dataset;
    }
    if (name) {
      request.name = name;
    }
    if (treatment) {
      request.treatment = treatment;
    }
    if (seedText) {
      request.seed = Number(seedText);
    }
    try {
      const created = await this.api.createSession(request);
      this.session = new ReviewSession(created.session);
      this.session.applyStatus(created);
      this.element("setup-panel").hidden = true;
      this.element("review-panel").hidden = false;
      this.element<HTMLAnchorElement>("export-link").href = this.api.exportUrl(
        created.session,
      );
      this.renderStatus(created);
      await this.loadBatch();
    } catch (error) {
      errorEl.textContent = this.describe(error);
    }
  }

  private describe(error: unknown): string {
    if (error instanceof ApiError) {
      return error.detail ? `${error.code}: ${error.detail}` : error.code;
    }
    return error instanceof Error ? error.message : String(error);
  }

  /** Fetch the current batch, cancelling any fetch still in the air. */
  private async loadBatch(): Promise<void> {
    if (!this.session) {
      return;
    }
    this.batchAbort?.abort();
    const abort = new AbortController();
    this.batchAbort = abort;
    try {
      const payload = await this.api.fetchBatch(this.session.id, abort.signal);
      if (this.batchAbort !== abort) {
        return; // a newer fetch superseded this one
      }
      this.session.applyBatch(payload);
      this.renderRows();
      renderPhase(this.element("phase-badge"), this.session.phase);
      this.element("completion-banner").hidden = !this.session.exhausted;
      this.element<HTMLButtonElement>("next-button").disabled = this.session.exhausted;
    } catch (error) {
      if ((error as { name?: string }).name === "AbortError") {
        return;
      }
      showToast(this.element("toast"), this.describe(error), () => {
        void this.loadBatch();
      });
    }
  }

  /** Send one batch of labels; never two submissions in flight at once. */
  private async submitLabels(labels: Record<string, "yes" | "no">): Promise<SessionStatus | null> {
    if (!this.session || this.mutationInFlight) {
      return null;
    }
    this.mutationInFlight = true;
    try {
      const status = await this.api.submitLabels(this.session.id, labels);
      this.session.markSubmitted(Object.keys(labels));
      this.renderStatus(status);
      hideToast(this.element("toast"));
      if (this.autoPlot) {
        await this.refreshPlot();
      }
      return status;
    } catch (error) {
      if (error instanceof ApiError) {
        // rejected submission: rows keep their codes and stay editable
        showToast(this.element("toast"), this.describe(error));
      } else {
        showToast(this.element("toast"), this.describe(error), () => {
          void this.submitLabels(labels);
        });
      }
      return null;
    } finally {
      this.mutationInFlight = false;
    }
  }

  private async submitAndNext(): Promise<void> {
    if (!this.session || this.mutationInFlight) {
      return;
    }
    const labels = this.session.pendingLabels();
    if (Object.keys(labels).length > 0) {
      const status = await this.submitLabels(labels);
      if (status === null) {
        return; // keep the rows on screen for correction
      }
    }
    await this.loadBatch();
  }

  private async submitRow(id: number): Promise<void> {
    if (!this.session) {
      return;
    }
    const row = this.session.row(id);
    if (!row || row.code === "unset" || row.submitted) {
      return;
    }
    const labels: Record<string, "yes" | "no"> = {
      [String(id)]: row.code === "relevant" ? "yes" : "no",
    };
    if (await this.submitLabels(labels)) {
      this.renderRows();
    }
  }

  private async restart(): Promise<void> {
    if (!this.session || this.mutationInFlight) {
      return;
    }
    this.mutationInFlight = true;
    try {
      const status = await this.api.restart(this.session.id);
      this.session.curve = [];
      this.renderStatus(status);
      renderPlot(this.element("plot-container"), []);
    } catch (error) {
      showToast(this.element("toast"), this.describe(error));
      return;
    } finally {
      this.mutationInFlight = false;
    }
    await this.loadBatch();
  }

  private async refreshPlot(): Promise<void> {
    if (!this.session) {
      return;
    }
    try {
      const payload = await this.api.fetchCurve(this.session.id);
      this.session.applyCurve(payload);
      renderPlot(this.element("plot-container"), this.session.curve);
    } catch (error) {
      showToast(this.element("toast"), this.describe(error), () => {
        void this.refreshPlot();
      });
    }
  }

  private renderStatus(status: SessionStatus): void {
    if (!this.session) {
      return;
    }
    this.session.applyStatus(status);
    renderStatusLine(this.element("status-line"), status);
    renderPhase(this.element("phase-badge"), status.phase);
  }

  private renderRows(): void {
    if (!this.session) {
      return;
    }
    renderTable(
      this.element<HTMLTableSectionElement>("coding-body"),
      this.session.rows,
      this.searchQuery,
      {
        onChoose: (id, code: Exclude<RowCode, "unset">) => {
          this.session?.chooseCode(id, code);
          this.renderRows();
        },
        onSubmitRow: (id) => {
          void this.submitRow(id);
        },
      },
    );
  }
}
