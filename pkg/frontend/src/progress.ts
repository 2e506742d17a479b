/** Read-only progress widgets over /state and /metrics. */

import { ApiClient, NetworkError } from "./api.js";

export class ProgressPoller {
  private timer: ReturnType<typeof setInterval> | null = null;

  constructor(
    private readonly api: ApiClient,
    private readonly root: Document,
    private readonly intervalMs = 2000,
  ) {}

  start(): void {
    const tick = () => void this.refresh();
    tick();
    this.timer = setInterval(tick, this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
  }

  private async refresh(): Promise<void> {
    const phaseEl = this.root.getElementById("phase-widget")!;
    const statsEl = this.root.getElementById("stats-widget")!;
    try {
      const state = await this.api.getState();
      phaseEl.textContent = `epoch ${state.epoch} · ${state.phase} · ${state.pending} pending`;
      const metrics = await this.api.getMetrics();
      if (metrics) {
        const cost = metrics.cost_percent.toFixed(4);
        const f1 = metrics.pairwise_f1 === null ? "n/a" : metrics.pairwise_f1.toFixed(3);
        statsEl.textContent =
          `${metrics.n_clusters} clusters · ${metrics.n_outliers} outliers · ` +
          `M=${metrics.cumulative_m} (${cost}%) · F1=${f1}`;
      }
    } catch (err) {
      if (!(err instanceof NetworkError)) throw err;
      phaseEl.textContent = "service unreachable";
    }
  }
}
