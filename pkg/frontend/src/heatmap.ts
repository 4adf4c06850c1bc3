/** Two-color decision heatmap over budget (x) and farm load (y).
 *
 * Cells are plain DOM nodes so clicks, classes and the scenario marker are
 * all inspectable; at a 20x20 default resolution that is cheap. */

import { DecisionMapResponse } from "./api.js";

export interface HeatmapModel {
  loads: number[];    // ascending
  budgets: number[];  // ascending
  /** install[loadIndex][budgetIndex], true where the server said Install */
  install: boolean[][];
}

/** Reshape the row-major map response (load outer, budget inner; incentives
 * held fixed) into the grid model; null when the server sent no cells. */
export function modelFromResponse(resp: DecisionMapResponse): HeatmapModel | null {
  const loads = resp.axes.farm_load;
  const budgets = resp.axes.budget;
  if (!resp.entries.length || !loads.length || !budgets.length) return null;
  const install: boolean[][] = [];
  for (let li = 0; li < loads.length; li++) {
    const row: boolean[] = [];
    for (let bi = 0; bi < budgets.length; bi++) {
      row.push(resp.entries[li * budgets.length + bi].action_code === 1);
    }
    install.push(row);
  }
  return { loads, budgets, install };
}

export function nearestIndex(values: number[], target: number): number {
  let best = 0;
  for (let i = 1; i < values.length; i++) {
    if (Math.abs(values[i] - target) < Math.abs(values[best] - target)) best = i;
  }
  return best;
}

export interface CellClick {
  farm_load: number;
  budget: number;
}

/** Rebuilds the heatmap inside `container`. The current scenario is marked
 * on its nearest cell; clicking any cell reports that cell's state. */
export function renderHeatmap(
  container: HTMLElement,
  model: HeatmapModel | null,
  current: { farm_load: number; budget: number },
  onCellClick: (cell: CellClick) => void,
): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  if (model === null) {
    const placeholder = doc.createElement("div");
    placeholder.className = "heatmap-placeholder";
    placeholder.textContent = "No decision map available.";
    container.appendChild(placeholder);
    return;
  }

  const grid = doc.createElement("div");
  grid.className = "heatmap-grid";
  grid.style.gridTemplateColumns = `repeat(${model.budgets.length}, 1fr)`;
  const markLoad = nearestIndex(model.loads, current.farm_load);
  const markBudget = nearestIndex(model.budgets, current.budget);

  // top row shows the highest load so the y axis reads upward
  for (let li = model.loads.length - 1; li >= 0; li--) {
    for (let bi = 0; bi < model.budgets.length; bi++) {
      const cell = doc.createElement("div");
      cell.className = model.install[li][bi]
        ? "heatmap-cell install"
        : "heatmap-cell dont-install";
      if (li === markLoad && bi === markBudget) cell.classList.add("marker");
      cell.dataset.load = String(model.loads[li]);
      cell.dataset.budget = String(model.budgets[bi]);
      cell.title = `load ${model.loads[li].toFixed(1)} kW, ` +
                   `budget ${model.budgets[bi].toFixed(0)}`;
      cell.addEventListener("click", () => onCellClick({
        farm_load: model.loads[li],
        budget: model.budgets[bi],
      }));
      grid.appendChild(cell);
    }
  }
  container.appendChild(grid);

  const legend = doc.createElement("div");
  legend.className = "heatmap-legend";
  for (const [cls, label] of [["install", "Install"],
                              ["dont-install", "Don't Install"]] as const) {
    const item = doc.createElement("span");
    item.className = "legend-item";
    const swatch = doc.createElement("span");
    swatch.className = `legend-swatch ${cls}`;
    const text = doc.createElement("span");
    text.textContent = label;
    item.append(swatch, text);
    legend.appendChild(item);
  }
  container.appendChild(legend);
}
