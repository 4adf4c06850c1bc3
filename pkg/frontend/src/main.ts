/** Wires the what-if advisor page: sliders in, recommendation + maps out.
 *
 * The UI performs no Q-value arithmetic beyond the argmax/|dQ| display;
 * every number and action label shown comes from the server verbatim. */

import { ApiClient, HealthResponse, LatestWins, Recommendation } from "./api.js";
import { renderTrainingCurve } from "./curve.js";
import { modelFromResponse, renderHeatmap } from "./heatmap.js";
import { clampScenario, ScenarioInput, toView } from "./scenario.js";

const HEATMAP_POINTS = 20;

function byId<T extends HTMLElement>(doc: Document, id: string): T {
  const el = doc.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
}

export interface App {
  /** Resolves when the in-flight refresh triggered by the last input settles. */
  idle(): Promise<void>;
}

export async function initApp(doc: Document, baseUrl = ""): Promise<App> {
  const api = new ApiClient(baseUrl);
  const sliders = {
    farm_load: byId<HTMLInputElement>(doc, "load-slider"),
    incentives: byId<HTMLInputElement>(doc, "incentives-slider"),
    budget: byId<HTMLInputElement>(doc, "budget-slider"),
  };
  const valueLabels = {
    farm_load: byId(doc, "load-value"),
    incentives: byId(doc, "incentives-value"),
    budget: byId(doc, "budget-value"),
  };
  const badge = byId(doc, "action-badge");
  const qDont = byId(doc, "q-dont");
  const qInstall = byId(doc, "q-install");
  const confidence = byId(doc, "confidence");
  const banner = byId(doc, "error-banner");
  const bannerText = byId(doc, "error-text");
  const retry = byId<HTMLButtonElement>(doc, "retry-button");
  const heatmap = byId(doc, "heatmap");
  const curvePanel = byId(doc, "curve-panel");
  const curveBox = byId(doc, "curve");
  const connection = byId(doc, "connection");

  const health: HealthResponse = await api.health();
  connection.textContent =
    `checkpoint v${health.checkpoint_version}, system cost ${health.system_cost}`;
  for (const key of ["farm_load", "incentives", "budget"] as const) {
    const [lo, hi] = health.ranges[key];
    sliders[key].min = String(lo);
    sliders[key].max = String(hi);
    sliders[key].step = String((hi - lo) / 200 || 1);
    sliders[key].value = String((lo + hi) / 2);
  }

  let pending: Promise<unknown> = Promise.resolve();

  function scenario(): ScenarioInput {
    return clampScenario({
      farm_load: Number(sliders.farm_load.value),
      incentives: Number(sliders.incentives.value),
      budget: Number(sliders.budget.value),
    }, health.ranges);
  }

  function showError(message: string): void {
    banner.hidden = false;
    bannerText.textContent = message;
    // never leave a stale recommendation next to an error
    badge.textContent = "—";
    badge.className = "badge unknown";
    qDont.textContent = "—";
    qInstall.textContent = "—";
    confidence.textContent = "—";
  }

  function showRecommendation(rec: Recommendation): void {
    banner.hidden = true;
    const view = toView(rec);
    badge.textContent = view.action;
    badge.className = view.installs ? "badge install" : "badge dont-install";
    // verbatim server numbers, no re-formatting
    qDont.textContent = String(rec.q_dont_install);
    qInstall.textContent = String(rec.q_install);
    confidence.textContent = view.confidence.toFixed(4);
  }

  const recommendLatest = new LatestWins(
    (s: ScenarioInput) => api.recommend(s.farm_load, s.incentives, s.budget));

  async function refreshRecommendation(): Promise<void> {
    const s = scenario();
    valueLabels.farm_load.textContent = `${s.farm_load.toFixed(1)} kW`;
    valueLabels.incentives.textContent = s.incentives.toFixed(0);
    valueLabels.budget.textContent = s.budget.toFixed(0);
    try {
      const rec = await recommendLatest.call(s);
      if (rec !== undefined) showRecommendation(rec);
    } catch (e) {
      showError(e instanceof Error ? e.message : String(e));
    }
  }

  const mapLatest = new LatestWins(
    (incentives: number) => api.decisionMap(HEATMAP_POINTS, HEATMAP_POINTS, incentives));

  async function refreshHeatmap(): Promise<void> {
    const s = scenario();
    try {
      const resp = await mapLatest.call(s.incentives);
      if (resp === undefined) return;
      renderHeatmap(heatmap, modelFromResponse(resp), s, (cell) => {
        sliders.farm_load.value = String(cell.farm_load);
        sliders.budget.value = String(cell.budget);
        pending = Promise.all([refreshRecommendation(), refreshHeatmap()]);
      });
    } catch {
      renderHeatmap(heatmap, null, s, () => undefined);
    }
  }

  sliders.farm_load.addEventListener("input", () => {
    pending = Promise.all([refreshRecommendation(), refreshHeatmap()]);
  });
  sliders.budget.addEventListener("input", () => {
    pending = Promise.all([refreshRecommendation(), refreshHeatmap()]);
  });
  // moving the incentives slider changes the heatmap slice as well
  sliders.incentives.addEventListener("input", () => {
    pending = Promise.all([refreshRecommendation(), refreshHeatmap()]);
  });
  retry.addEventListener("click", () => {
    pending = Promise.all([refreshRecommendation(), refreshHeatmap()]);
  });

  let curveDone: Promise<void>;
  try {
    curveDone = api.curve().then((data) => {
      renderTrainingCurve(curvePanel, curveBox, data);
    });
  } catch {
    curveDone = Promise.resolve();
    curvePanel.hidden = true;
  }
  curveDone = curveDone.catch(() => {
    curvePanel.hidden = true;
  });

  pending = Promise.all([refreshRecommendation(), refreshHeatmap(), curveDone]);

  return {
    async idle() {
      // chained refreshes (e.g. cell click during refresh) extend `pending`
      let last: Promise<unknown>;
      do {
        last = pending;
        await last;
      } while (last !== pending);
    },
  };
}
