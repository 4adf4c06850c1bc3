/** Scenario state and the derived recommendation view. */

import { Ranges, Recommendation } from "./api.js";

export interface ScenarioInput {
  farm_load: number;
  incentives: number;
  budget: number;
}

export function clamp(value: number, lo: number, hi: number): number {
  if (Number.isNaN(value)) return lo;
  return Math.min(hi, Math.max(lo, value));
}

/** Values leave the UI only after clamping to the server-advertised ranges. */
export function clampScenario(input: ScenarioInput, ranges: Ranges): ScenarioInput {
  return {
    farm_load: clamp(input.farm_load, ranges.farm_load[0], ranges.farm_load[1]),
    incentives: clamp(input.incentives, ranges.incentives[0], ranges.incentives[1]),
    budget: clamp(input.budget, ranges.budget[0], ranges.budget[1]),
  };
}

export interface RecommendationView {
  /** Action label exactly as the server sent it. */
  action: string;
  qDontInstall: number;
  qInstall: number;
  /** |Q(Install) - Q(Don't Install)|, a rough confidence proxy. */
  confidence: number;
  installs: boolean;
}

export function toView(rec: Recommendation): RecommendationView {
  return {
    action: rec.action,
    qDontInstall: rec.q_dont_install,
    qInstall: rec.q_install,
    confidence: Math.abs(rec.q_install - rec.q_dont_install),
    installs: rec.q_install > rec.q_dont_install,
  };
}
