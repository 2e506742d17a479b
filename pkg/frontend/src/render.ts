/** DOM renderer: two panes, kind badge, staged-verdict highlight, toasts,
 * retry banner, and the cost widget. */

import type { Renderer } from "./controller.js";
import { drawScatter } from "./scatter.js";
import type { QueryPayload, QuerySide, Verdict } from "./types.js";

export class DomRenderer implements Renderer {
  private readonly panes: HTMLElement;
  private readonly badge: HTMLElement;
  private readonly epochLabel: HTMLElement;
  private readonly stagedBar: HTMLElement;
  private readonly toast: HTMLElement;
  private readonly banner: HTMLElement;
  private readonly cost: HTMLElement;
  private toastTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(root: Document) {
    this.panes = root.getElementById("panes")!;
    this.badge = root.getElementById("kind-badge")!;
    this.epochLabel = root.getElementById("epoch-label")!;
    this.stagedBar = root.getElementById("staged-bar")!;
    this.toast = root.getElementById("toast")!;
    this.banner = root.getElementById("retry-banner")!;
    this.cost = root.getElementById("cost-widget")!;
  }

  async showQuery(query: QueryPayload): Promise<void> {
    this.badge.textContent = query.kind;
    this.badge.className = `badge badge-${query.kind}`;
    this.epochLabel.textContent = `epoch ${query.epoch}`;
    this.panes.replaceChildren();
    await Promise.all([
      this.renderSide(query.a, "A"),
      this.renderSide(query.b, "B"),
    ]);
  }

  private renderSide(side: QuerySide, label: string): Promise<void> {
    const pane = document.createElement("div");
    pane.className = "pane";
    const caption = document.createElement("div");
    caption.className = "caption";
    caption.textContent = `${label} · sample ${side.sample_id}`;
    pane.appendChild(caption);
    this.panes.appendChild(pane);

    if (side.image_url) {
      const img = document.createElement("img");
      img.alt = `sample ${side.sample_id}`;
      pane.appendChild(img);
      return new Promise((resolve) => {
        img.onload = () => resolve();
        img.onerror = () => resolve(); // broken image still counts as rendered
        img.src = side.image_url!;
      });
    }
    const canvas = document.createElement("canvas");
    canvas.width = 360;
    canvas.height = 280;
    pane.appendChild(canvas);
    if (side.coords) {
      drawScatter(canvas, side.coords);
    }
    return Promise.resolve();
  }

  showIdle(): void {
    this.badge.textContent = "idle";
    this.badge.className = "badge badge-idle";
    this.panes.replaceChildren();
    const msg = document.createElement("div");
    msg.className = "idle-message";
    msg.textContent = "No pending pairs — waiting for the engine.";
    this.panes.appendChild(msg);
    this.setStaged(null);
  }

  setStaged(verdict: Verdict | null): void {
    if (verdict === null) {
      this.stagedBar.textContent = "S = same   ·   D = different   ·   U = undo";
      this.stagedBar.className = "staged-bar";
    } else {
      const word = verdict === "positive" ? "SAME" : "DIFFERENT";
      this.stagedBar.textContent = `${word} — press U to undo`;
      this.stagedBar.className = `staged-bar staged-${verdict}`;
    }
  }

  showToast(message: string): void {
    this.toast.textContent = message;
    this.toast.classList.add("visible");
    if (this.toastTimer !== null) clearTimeout(this.toastTimer);
    this.toastTimer = setTimeout(() => this.toast.classList.remove("visible"), 2500);
  }

  showRetryBanner(delayMs: number): void {
    this.banner.textContent = `Connection problem — retrying in ${(delayMs / 1000).toFixed(1)} s`;
    this.banner.classList.add("visible");
  }

  clearRetryBanner(): void {
    this.banner.classList.remove("visible");
  }

  updateCost(m: number): void {
    this.cost.textContent = `labeled pairs: ${m}`;
  }
}
