/** Reward-per-episode line chart, one SVG point per episode. */

import { CurveResponse } from "./api.js";

const SVG_NS = "http://www.w3.org/2000/svg";
const WIDTH = 640;
const HEIGHT = 220;
const PAD = 30;

/** Renders the training curve, or hides the whole panel when there is no
 * log to show. */
export function renderTrainingCurve(panel: HTMLElement, container: HTMLElement,
                                    data: CurveResponse): void {
  container.textContent = "";
  if (!data.episodes.length) {
    panel.hidden = true;
    return;
  }
  panel.hidden = false;

  const xs = data.episodes;
  const ys = data.total_rewards;
  const xMin = xs[0];
  const xMax = xs[xs.length - 1];
  let yMin = Math.min(...ys);
  let yMax = Math.max(...ys);
  if (yMin === yMax) {
    yMin -= 1;
    yMax += 1;
  }
  const sx = (x: number) =>
    PAD + ((x - xMin) / Math.max(1e-12, xMax - xMin)) * (WIDTH - 2 * PAD);
  const sy = (y: number) =>
    HEIGHT - PAD - ((y - yMin) / (yMax - yMin)) * (HEIGHT - 2 * PAD);

  const doc = container.ownerDocument;
  const svg = doc.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute("class", "curve-svg");

  const line = doc.createElementNS(SVG_NS, "polyline");
  line.setAttribute("class", "curve-line");
  line.setAttribute("fill", "none");
  line.setAttribute("points",
    xs.map((x, i) => `${sx(x).toFixed(2)},${sy(ys[i]).toFixed(2)}`).join(" "));
  svg.appendChild(line);

  for (let i = 0; i < xs.length; i++) {
    const point = doc.createElementNS(SVG_NS, "circle");
    point.setAttribute("class", "curve-point");
    point.setAttribute("cx", sx(xs[i]).toFixed(2));
    point.setAttribute("cy", sy(ys[i]).toFixed(2));
    point.setAttribute("r", "2");
    const tip = doc.createElementNS(SVG_NS, "title");
    tip.textContent = `episode ${xs[i]}: reward ${ys[i].toFixed(3)}`;
    point.appendChild(tip);
    svg.appendChild(point);
  }
  container.appendChild(svg);
}
