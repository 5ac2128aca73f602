// DOM builders for the coding screen. Everything displayed is taken
// verbatim from server payloads; these helpers only lay it out.

import type { SessionStatus } from "./api.js";
import type { ReviewRow, RowCode } from "./state.js";

export interface RowHandlers {
  onChoose(id: number, code: Exclude<RowCode, "unset">): void;
  onSubmitRow(id: number): void;
}

/** The status line shows the server's status string byte for byte. */
export function renderStatusLine(element: HTMLElement, status: SessionStatus | null): void {
  element.textContent = status ? status.status : "";
}

export function renderPhase(element: HTMLElement, phase: string): void {
  element.textContent = phase;
  element.dataset.phase = phase;
}

/** Mark occurrences of `query` in `text` so reviewers can scan abstracts. */
export function highlightFragment(
  doc: Document,
  text: string,
  query: string,
): DocumentFragment {
  const fragment = doc.createDocumentFragment();
  const needle = query.trim().toLowerCase();
  if (!needle) {
    fragment.appendChild(doc.createTextNode(text));
    return fragment;
  }
  const haystack = text.toLowerCase();
  let position = 0;
  while (position < text.length) {
    const found = haystack.indexOf(needle, position);
    if (found < 0) {
      fragment.appendChild(doc.createTextNode(text.slice(position)));
      break;
    }
    if (found > position) {
      fragment.appendChild(doc.createTextNode(text.slice(position, found)));
    }
    const mark = doc.createElement("mark");
    mark.textContent = text.slice(found, found + needle.length);
    fragment.appendChild(mark);
    position = found + needle.length;
  }
  return fragment;
}

function codeControl(
  doc: Document,
  row: ReviewRow,
  code: Exclude<RowCode, "unset">,
  handlers: RowHandlers,
): HTMLLabelElement {
  const label = doc.createElement("label");
  label.className = "code-choice";
  const input = doc.createElement("input");
  input.type = "radio";
  input.name = `code-${row.id}`;
  input.value = code;
  input.checked = row.code === code;
  input.addEventListener("change", () => handlers.onChoose(row.id, code));
  label.append(input, doc.createTextNode(code));
  return label;
}

export function buildRow(
  doc: Document,
  row: ReviewRow,
  query: string,
  handlers: RowHandlers,
): HTMLTableRowElement {
  const tr = doc.createElement("tr");
  tr.dataset.studyId = String(row.id);
  tr.classList.toggle("submitted", row.submitted);

  const titleCell = doc.createElement("td");
  titleCell.className = "title-cell";
  if (row.pdfLink) {
    const link = doc.createElement("a");
    link.href = row.pdfLink;
    link.target = "_blank";
    link.rel = "noopener";
    link.appendChild(highlightFragment(doc, row.title, query));
    titleCell.appendChild(link);
  } else {
    titleCell.appendChild(highlightFragment(doc, row.title, query));
  }
  const details = doc.createElement("details");
  const summary = doc.createElement("summary");
  summary.textContent = "abstract";
  const abstract = doc.createElement("p");
  abstract.className = "abstract";
  abstract.appendChild(highlightFragment(doc, row.abstract, query));
  details.append(summary, abstract);
  titleCell.appendChild(details);

  const yearCell = doc.createElement("td");
  yearCell.textContent = row.year;

  const codeCell = doc.createElement("td");
  codeCell.className = "code-cell";
  codeCell.append(
    codeControl(doc, row, "relevant", handlers),
    codeControl(doc, row, "irrelevant", handlers),
  );

  const submitCell = doc.createElement("td");
  const submit = doc.createElement("button");
  submit.type = "button";
  submit.className = "row-submit";
  submit.textContent = row.submitted ? "submitted" : "submit";
  submit.disabled = row.code === "unset" || row.submitted;
  submit.addEventListener("click", () => handlers.onSubmitRow(row.id));
  submitCell.appendChild(submit);

  tr.append(titleCell, yearCell, codeCell, submitCell);
  return tr;
}

export function renderTable(
  body: HTMLTableSectionElement,
  rows: ReviewRow[],
  query: string,
  handlers: RowHandlers,
): void {
  const doc = body.ownerDocument;
  body.replaceChildren(...rows.map((row) => buildRow(doc, row, query, handlers)));
}

/** Transient error surface; the retry action reruns the failed step. */
export function showToast(
  element: HTMLElement,
  message: string,
  retry?: () => void,
): void {
  element.replaceChildren();
  element.hidden = false;
  const text = element.ownerDocument.createElement("span");
  text.textContent = message;
  element.appendChild(text);
  if (retry) {
    const button = element.ownerDocument.createElement("button");
    button.type = "button";
    button.className = "toast-retry";
    button.textContent = "retry";
    button.addEventListener("click", () => {
      hideToast(element);
      retry();
    });
    element.appendChild(button);
  }
}

export function hideToast(element: HTMLElement): void {
  element.hidden = true;
  element.replaceChildren();
}
