/** DOM rendering. Every function here is presentation only: the result
 * table is written in exactly the order the service returned, never
 * re-sorted or re-scored client-side. */

import type {
  CourseResult,
  KeywordSemester,
  ProjectionPoint,
  SimilarResponse,
} from "./types.js";

function clear(el: HTMLElement): void {
  while (el.firstChild) el.removeChild(el.firstChild);
}

function cell(row: HTMLTableRowElement, text: string, cls?: string): void {
  const td = row.ownerDocument.createElement("td");
  td.textContent = text;
  if (cls) td.className = cls;
  row.appendChild(td);
}

export function renderResults(tbody: HTMLElement, results: CourseResult[]): void {
  clear(tbody);
  const doc = tbody.ownerDocument;
  for (const r of results) {
    const row = doc.createElement("tr");
    row.className = "result-row";
    row.dataset.course = `${r.subject} ${r.course_number}`;
    cell(row, String(r.rank), "rank");
    cell(row, `${r.subject} ${r.course_number}`, "course");
    cell(row, r.title, "title");
    cell(row, r.score.toFixed(4), "score");
    cell(
      row,
      `i ${r.components.interest.toFixed(3)} / ` +
        `d ${r.components.disinterest.toFixed(3)} / ` +
        `c ${r.components.collaborative.toFixed(3)}`,
      "components",
    );
    tbody.appendChild(row);
  }
}

/** Course labels in displayed order, for tests and for click handlers. */
export function displayedOrder(tbody: HTMLElement): string[] {
  return Array.from(tbody.querySelectorAll("tr.result-row")).map(
    (row) => (row as HTMLElement).dataset.course ?? "",
  );
}

export function renderKeywordPanel(
  container: HTMLElement,
  semesters: KeywordSemester[],
): void {
  clear(container);
  const doc = container.ownerDocument;
  for (const sem of semesters) {
    const section = doc.createElement("div");
    section.className = "semester";
    const heading = doc.createElement("h4");
    heading.textContent = sem.label;
    section.appendChild(heading);
    for (const word of sem.keywords) {
      const chip = doc.createElement("span");
      chip.className = "chip";
      chip.textContent = word;
      section.appendChild(chip);
    }
    container.appendChild(section);
  }
}

export function renderSimilar(tbody: HTMLElement, resp: SimilarResponse): void {
  clear(tbody);
  const doc = tbody.ownerDocument;
  for (const n of resp.neighbors) {
    const row = doc.createElement("tr");
    row.className = "neighbor-row";
    cell(row, `${n.subject} ${n.course_number}`, "course");
    cell(row, n.title, "title");
    cell(row, n.similarity.toFixed(4), "similarity");
    tbody.appendChild(row);
  }
}

export function renderSelect(
  select: HTMLSelectElement,
  options: string[],
  placeholder: string,
): void {
  clear(select);
  const doc = select.ownerDocument;
  const blank = doc.createElement("option");
  blank.value = "";
  blank.textContent = placeholder;
  select.appendChild(blank);
  for (const opt of options) {
    const el = doc.createElement("option");
    el.value = opt;
    el.textContent = opt;
    select.appendChild(el);
  }
}

export function renderError(el: HTMLElement, message: string | null): void {
  el.textContent = message ?? "";
  el.classList.toggle("visible", message !== null);
}

const PALETTE = [
  "#4c72b0", "#dd8452", "#55a868", "#c44e52",
  "#8172b3", "#937860", "#da8bc3", "#8c8c8c",
];

export function renderScatter(svg: SVGSVGElement, points: ProjectionPoint[]): void {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
  if (points.length === 0) return;
  const doc = svg.ownerDocument;
  const ns = "http://www.w3.org/2000/svg";
  const majors = Array.from(new Set(points.map((p) => p.major))).sort();
  const color = new Map(majors.map((m, i) => [m, PALETTE[i % PALETTE.length]]));
  const xs = points.map((p) => p.x);
  const ys = points.map((p) => p.y);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(...ys), Math.max(...ys)];
  const sx = (x: number) => 10 + (x1 > x0 ? ((x - x0) / (x1 - x0)) * 380 : 190);
  const sy = (y: number) => 10 + (y1 > y0 ? ((y1 - y) / (y1 - y0)) * 280 : 140);
  for (const p of points) {
    const c = doc.createElementNS(ns, "circle");
    c.setAttribute("cx", sx(p.x).toFixed(1));
    c.setAttribute("cy", sy(p.y).toFixed(1));
    c.setAttribute("r", "3");
    c.setAttribute("fill", color.get(p.major) ?? "#000");
    const title = doc.createElementNS(ns, "title");
    title.textContent = `${p.student_id} (${p.major})`;
    c.appendChild(title);
    svg.appendChild(c);
  }
}
