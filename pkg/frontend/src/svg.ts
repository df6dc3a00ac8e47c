/**
 * Minimal deterministic SVG plotting: fixed-precision coordinates, no
 * timestamps, no randomness — identical inputs produce identical bytes.
 */

const FMT = (v: number): string => {
  if (!isFinite(v)) return "0";
  return v.toFixed(2).replace(/-0\.00/, "0.00");
};

export interface Extent {
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

export interface PanelSpec {
  title: string;
  extent: Extent;
  xLabel: string;
  yLabel: string;
  elements: string[];
}

export class Panel implements PanelSpec {
  title = "";
  xLabel = "";
  yLabel = "";
  elements: string[] = [];
  extent: Extent;

  constructor(extent: Extent) {
    this.extent = extent;
  }

  private sx(x: number, w: number): number {
    const { xMin, xMax } = this.extent;
    return ((x - xMin) / (xMax - xMin || 1)) * w;
  }

  private sy(y: number, h: number): number {
    const { yMin, yMax } = this.extent;
    return h - ((y - yMin) / (yMax - yMin || 1)) * h;
  }

  line(
    xs: number[],
    ys: number[],
    stroke: string,
    width = 1.2,
    dash = "",
  ): void {
    this.elements.push(
      JSON.stringify({ kind: "line", xs, ys, stroke, width, dash }),
    );
  }

  vline(x: number, stroke: string, dash = "4,3"): void {
    this.elements.push(JSON.stringify({ kind: "vline", x, stroke, dash }));
  }

  circle(x: number, y: number, r: number, stroke: string): void {
    this.elements.push(JSON.stringify({ kind: "circle", x, y, r, stroke }));
  }

  render(w: number, h: number): string {
    const parts: string[] = [];
    parts.push(
      `<rect x="0" y="0" width="${FMT(w)}" height="${FMT(h)}" fill="white" stroke="black" stroke-width="0.8"/>`,
    );
    for (const el of this.elements) {
      const e = JSON.parse(el);
      if (e.kind === "line") {
        const pts = e.xs
          .map(
            (x: number, i: number) =>
              `${FMT(this.sx(x, w))},${FMT(this.sy(e.ys[i], h))}`,
          )
          .join(" ");
        const dash = e.dash ? ` stroke-dasharray="${e.dash}"` : "";
        parts.push(
          `<polyline points="${pts}" fill="none" stroke="${e.stroke}" stroke-width="${e.width}"${dash}/>`,
        );
      } else if (e.kind === "vline") {
        const px = FMT(this.sx(e.x, w));
        parts.push(
          `<line x1="${px}" y1="0" x2="${px}" y2="${FMT(h)}" stroke="${e.stroke}" stroke-width="1" stroke-dasharray="${e.dash}"/>`,
        );
      } else if (e.kind === "circle") {
        parts.push(
          `<circle cx="${FMT(this.sx(e.x, w))}" cy="${FMT(this.sy(e.y, h))}" r="${e.r}" fill="none" stroke="${e.stroke}" stroke-width="1.4"/>`,
        );
      }
    }
    // axis tick labels: min/max on both axes
    const { xMin, xMax, yMin, yMax } = this.extent;
    parts.push(
      `<text x="2" y="${FMT(h - 3)}" font-size="8" fill="#444">${trimNum(xMin)}</text>`,
      `<text x="${FMT(w - 4)}" y="${FMT(h - 3)}" font-size="8" fill="#444" text-anchor="end">${trimNum(xMax)}</text>`,
      `<text x="2" y="9" font-size="8" fill="#444">${trimNum(yMax)}</text>`,
    );
    if (this.title) {
      parts.push(
        `<text x="${FMT(w / 2)}" y="12" font-size="10" text-anchor="middle">${escapeXml(this.title)}</text>`,
      );
    }
    if (this.xLabel) {
      parts.push(
        `<text x="${FMT(w / 2)}" y="${FMT(h - 3)}" font-size="8" text-anchor="middle" fill="#222">${escapeXml(this.xLabel)}</text>`,
      );
    }
    if (this.yLabel) {
      parts.push(
        `<text x="10" y="${FMT(h / 2)}" font-size="8" fill="#222" transform="rotate(-90 10 ${FMT(h / 2)})" text-anchor="middle">${escapeXml(this.yLabel)}</text>`,
      );
    }
    return parts.join("\n");
  }
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function trimNum(v: number): string {
  const s = v.toPrecision(4);
  return String(Number(s));
}

export function figure(
  panels: Panel[],
  columns: number,
  panelW = 340,
  panelH = 200,
  pad = 14,
): string {
  const rows = Math.ceil(panels.length / columns);
  const W = columns * (panelW + pad) + pad;
  const H = rows * (panelH + pad) + pad;
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${W}" height="${H}" viewBox="0 0 ${W} ${H}">`,
    `<rect width="${W}" height="${H}" fill="white"/>`,
  ];
  panels.forEach((p, i) => {
    const cx = pad + (i % columns) * (panelW + pad);
    const cy = pad + Math.floor(i / columns) * (panelH + pad);
    parts.push(`<g transform="translate(${cx},${cy})">`);
    parts.push(p.render(panelW, panelH));
    parts.push("</g>");
  });
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}

export function extentOf(xs: number[], ys: number[], padFrac = 0.05): Extent {
  let xMin = Infinity,
    xMax = -Infinity,
    yMin = Infinity,
    yMax = -Infinity;
  for (const x of xs) {
    if (x < xMin) xMin = x;
    if (x > xMax) xMax = x;
  }
  for (const y of ys) {
    if (y < yMin) yMin = y;
    if (y > yMax) yMax = y;
  }
  const dy = (yMax - yMin || 1) * padFrac;
  return { xMin, xMax, yMin: yMin - dy, yMax: yMax + dy };
}
