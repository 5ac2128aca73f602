// Inline-SVG recall chart: relevant studies found against studies coded.
// Pure string/number helpers are exported separately so they can be
// tested without a DOM.

export interface PlotGeometry {
  width: number;
  height: number;
  marginLeft: number;
  marginRight: number;
  marginTop: number;
  marginBottom: number;
}

export const GEOMETRY: PlotGeometry = {
  width: 560,
  height: 300,
  marginLeft: 55,
  marginRight: 20,
  marginTop: 20,
  marginBottom: 45,
};

/** Round axis ticks (step 1/2/5 times a power of ten) covering 0..upper. */
export function axisTicks(upper: number, count = 5): number[] {
  if (upper <= 0) {
    return [0, 1];
  }
  const rawStep = Math.max(upper / count, 1);
  const magnitude = 10 ** Math.floor(Math.log10(rawStep));
  let step = magnitude * 10;
  for (const factor of [1, 2, 5]) {
    if (magnitude * factor >= rawStep) {
      step = magnitude * factor;
      break;
    }
  }
  const ticks: number[] = [];
  for (let value = 0; value <= upper + step - 1e-9; value += step) {
    ticks.push(Math.round(value));
    if (value >= upper) {
      break;
    }
  }
  return ticks;
}

function format(value: number): string {
  return String(Math.round(value * 100) / 100);
}

function scale(
  value: number,
  domainMax: number,
  rangeStart: number,
  rangeEnd: number,
): number {
  const span = domainMax > 0 ? domainMax : 1;
  return rangeStart + (value / span) * (rangeEnd - rangeStart);
}

/** The polyline "points" attribute for a coded/found curve. */
export function curvePoints(
  points: [number, number][],
  geometry: PlotGeometry = GEOMETRY,
): string {
  const xMax = Math.max(...points.map(([coded]) => coded));
  const yMax = Math.max(...points.map(([, found]) => found));
  const left = geometry.marginLeft;
  const right = geometry.width - geometry.marginRight;
  const top = geometry.marginTop;
  const bottom = geometry.height - geometry.marginBottom;
  return points
    .map(([coded, found]) => {
      const x = scale(coded, xMax, left, right);
      const y = scale(found, yMax, bottom, top);
      return `${format(x)},${format(y)}`;
    })
    .join(" ");
}

/** Full SVG markup for the chart; an empty curve gets an empty-state note. */
export function chartMarkup(
  points: [number, number][],
  geometry: PlotGeometry = GEOMETRY,
): string {
  const { width, height } = geometry;
  const parts: string[] = [
    `<svg viewBox="0 0 ${width} ${height}" role="img" aria-label="recall curve">`,
    `<rect class="plot-bg" x="0" y="0" width="${width}" height="${height}"/>`,
  ];
  const left = geometry.marginLeft;
  const right = width - geometry.marginRight;
  const top = geometry.marginTop;
  const bottom = height - geometry.marginBottom;

  if (points.length === 0) {
    parts.push(
      `<text class="plot-empty" x="${width / 2}" y="${height / 2}" ` +
        `text-anchor="middle">no codes submitted yet</text>`,
      "</svg>",
    );
    return parts.join("");
  }

  const xMax = Math.max(...points.map(([coded]) => coded));
  const yMax = Math.max(...points.map(([, found]) => found));
  for (const tick of axisTicks(xMax)) {
    const x = scale(tick, Math.max(xMax, 1), left, right);
    parts.push(
      `<line class="plot-grid" x1="${format(x)}" y1="${top}" x2="${format(x)}" y2="${bottom}"/>`,
      `<text class="plot-tick" x="${format(x)}" y="${bottom + 16}" text-anchor="middle">${tick}</text>`,
    );
  }
  for (const tick of axisTicks(yMax)) {
    const y = scale(tick, Math.max(yMax, 1), bottom, top);
    parts.push(
      `<line class="plot-grid" x1="${left}" y1="${format(y)}" x2="${right}" y2="${format(y)}"/>`,
      `<text class="plot-tick" x="${left - 6}" y="${format(y)}" text-anchor="end">${tick}</text>`,
    );
  }
  parts.push(
    `<line class="plot-axis" x1="${left}" y1="${bottom}" x2="${right}" y2="${bottom}"/>`,
    `<line class="plot-axis" x1="${left}" y1="${top}" x2="${left}" y2="${bottom}"/>`,
    `<text class="plot-label" x="${(left + right) / 2}" y="${height - 8}" text-anchor="middle">studies coded</text>`,
    `<text class="plot-label" x="14" y="${(top + bottom) / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 14 ${(top + bottom) / 2})">relevant found</text>`,
    `<polyline class="plot-line" fill="none" points="${curvePoints(points, geometry)}"/>`,
    "</svg>",
  );
  return parts.join("");
}

export function renderPlot(container: HTMLElement, points: [number, number][]): void {
  container.innerHTML = chartMarkup(points);
}
