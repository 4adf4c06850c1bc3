/** Shared DOM fixture and a scripted advisor server for the tests. */

import { vi } from "vitest";

export const PAGE = `
  <p id="connection"></p>
  <div id="error-banner" hidden>
    <span id="error-text"></span>
    <button id="retry-button" type="button">Retry</button>
  </div>
  <input type="range" id="load-slider"><span id="load-value"></span>
  <input type="range" id="incentives-slider"><span id="incentives-value"></span>
  <input type="range" id="budget-slider"><span id="budget-value"></span>
  <span id="action-badge"></span>
  <dd id="q-dont"></dd>
  <dd id="q-install"></dd>
  <dd id="confidence"></dd>
  <div id="heatmap"></div>
  <section id="curve-panel" hidden><div id="curve"></div></section>
`;

export function mountPage(): void {
  document.body.innerHTML = PAGE;
}

export const HEALTH = {
  status: "ok",
  checkpoint_version: 1,
  ranges: {
    farm_load: [0, 10] as [number, number],
    incentives: [0, 4000] as [number, number],
    budget: [0, 12000] as [number, number],
  },
  system_cost: 9000,
};

export interface ServedRecommendation {
  action: string;
  q_dont_install: number;
  q_install: number;
}

export interface FakeServer {
  /** every recommendation payload served, in order */
  recommendations: ServedRecommendation[];
  mapRequests: string[];
  curve: { episodes: number[]; total_rewards: number[] };
  failNextRecommend: boolean;
}

/** Installs a fetch stub that behaves like the advisor API: health from the
 * fixture, recommendations computed from the query (Install above the
 * affordability line), a small decision map, and a scripted curve. */
export function installFakeServer(overrides: Partial<FakeServer> = {}): FakeServer {
  const server: FakeServer = {
    recommendations: [],
    mapRequests: [],
    curve: { episodes: [], total_rewards: [] },
    failNextRecommend: false,
    ...overrides,
  };

  const json = (body: unknown, status = 200) =>
    new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });

  vi.stubGlobal("fetch", vi.fn(async (input: RequestInfo | URL) => {
    const url = new URL(String(input), "http://advisor.test");
    if (url.pathname === "/api/health") return json(HEALTH);

    if (url.pathname === "/api/recommend") {
      if (server.failNextRecommend) {
        server.failNextRecommend = false;
        return json({ error: "scripted failure" }, 400);
      }
      const load = Number(url.searchParams.get("load"));
      const incentives = Number(url.searchParams.get("incentives"));
      const budget = Number(url.searchParams.get("budget"));
      const feasible = budget >= Math.max(0, HEALTH.system_cost - incentives);
      const qDont = -(0.2 * load) * 10;
      const qInstall = feasible ? qDont + 0.8 : qDont - 5;
      const payload: ServedRecommendation = {
        action: qInstall > qDont ? "Install" : "Don't Install",
        q_dont_install: qDont,
        q_install: qInstall,
      };
      server.recommendations.push(payload);
      return json(payload);
    }

    if (url.pathname === "/api/map") {
      server.mapRequests.push(url.search);
      const loadPoints = Number(url.searchParams.get("load_points"));
      const budgetPoints = Number(url.searchParams.get("budget_points"));
      const incentives = Number(url.searchParams.get("incentives_fixed"));
      const loads = Array.from({ length: loadPoints },
        (_, i) => (10 * i) / Math.max(1, loadPoints - 1));
      const budgets = Array.from({ length: budgetPoints },
        (_, i) => (12000 * i) / Math.max(1, budgetPoints - 1));
      const entries = [];
      for (const l of loads) {
        for (const b of budgets) {
          const feasible = b >= Math.max(0, HEALTH.system_cost - incentives);
          entries.push({
            farm_load: l,
            incentives,
            budget: b,
            action: feasible ? "Install" : "Don't Install",
            action_code: feasible ? 1 : 0,
            q_dont_install: -l,
            q_install: feasible ? -l + 1 : -l - 5,
          });
        }
      }
      return json({
        axes: { farm_load: loads, incentives: [incentives], budget: budgets },
        entries,
      });
    }

    if (url.pathname === "/api/curve") return json(server.curve);
    return json({ error: `no such endpoint: ${url.pathname}` }, 404);
  }));
  return server;
}

export function setSlider(id: string, value: number): void {
  const slider = document.getElementById(id) as HTMLInputElement;
  slider.value = String(value);
  slider.dispatchEvent(new Event("input"));
}

export function text(id: string): string {
  return document.getElementById(id)!.textContent ?? "";
}
