/** Typed client for the advisor HTTP API. All model math stays server-side;
 * the UI only displays what these endpoints return. */

export interface Ranges {
  farm_load: [number, number];
  incentives: [number, number];
  budget: [number, number];
}

export interface HealthResponse {
  status: string;
  checkpoint_version: number;
  ranges: Ranges;
  system_cost: number;
}

export interface Recommendation {
  action: string;
  q_dont_install: number;
  q_install: number;
}

export interface MapEntry {
  farm_load: number;
  incentives: number;
  budget: number;
  action: string;
  action_code: number;
  q_dont_install: number;
  q_install: number;
}

export interface DecisionMapResponse {
  axes: { farm_load: number[]; incentives: number[]; budget: number[] };
  entries: MapEntry[];
}

export interface CurveResponse {
  episodes: number[];
  total_rewards: number[];
}

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

async function getJson<T>(url: string): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url);
  } catch (e) {
    throw new ApiError(`cannot reach the advisor server (${String(e)})`);
  }
  if (!response.ok) {
    let detail = `HTTP ${response.status}`;
    try {
      const body = (await response.json()) as { error?: string };
      if (body.error) detail = body.error;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(detail, response.status);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  health(): Promise<HealthResponse> {
    return getJson(`${this.baseUrl}/api/health`);
  }

  recommend(load: number, incentives: number, budget: number): Promise<Recommendation> {
    const q = `load=${load}&incentives=${incentives}&budget=${budget}`;
    return getJson(`${this.baseUrl}/api/recommend?${q}`);
  }

  decisionMap(loadPoints: number, budgetPoints: number,
              incentivesFixed: number): Promise<DecisionMapResponse> {
    const q = `load_points=${loadPoints}&budget_points=${budgetPoints}` +
              `&incentives_fixed=${incentivesFixed}`;
    return getJson(`${this.baseUrl}/api/map?${q}`);
  }

  curve(): Promise<CurveResponse> {
    return getJson(`${this.baseUrl}/api/curve`);
  }
}

/** Serializes an async request stream: resolutions of anything but the
 * most recent call are dropped, so a slow response can never overwrite a
 * newer one (at most one logical request in flight). */
export class LatestWins<A extends unknown[], R> {
  private ticket = 0;

  constructor(private readonly run: (...args: A) => Promise<R>) {}

  async call(...args: A): Promise<R | undefined> {
    const mine = ++this.ticket;
    const result = await this.run(...args);
    return mine === this.ticket ? result : undefined;
  }
}
