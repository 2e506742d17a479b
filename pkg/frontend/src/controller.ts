/** The annotator flow, free of DOM concerns so it can be driven headlessly:
 * fetch a query, wait for both panes to render, stage a verdict on S/D with a
 * short undo window (U), submit exactly once, advance. 204 responses show the
 * idle screen and poll with backoff; network failures show a retry banner
 * with the same capped backoff. */

import { AnnotationApi, NetworkError, NextQueryResult } from "./api.js";
import { Backoff } from "./backoff.js";
import type { QueryPayload, Verdict } from "./types.js";

export type Phase = "starting" | "idle" | "showing" | "staged" | "submitting" | "retrying";

export interface Renderer {
  /** Render both panes; resolves when they are fully displayed (images
   * loaded / scatter drawn). Verdict keys are inert until then. */
  showQuery(query: QueryPayload): Promise<void>;
  showIdle(): void;
  setStaged(verdict: Verdict | null): void;
  showToast(message: string): void;
  showRetryBanner(delayMs: number): void;
  clearRetryBanner(): void;
  updateCost(m: number): void;
}

export interface ControllerOptions {
  /** Grace period between staging a verdict and submitting it; U cancels. */
  undoGraceMs?: number;
  idlePollBaseMs?: number;
  sleep?: (ms: number) => Promise<void>;
}

const defaultSleep = (ms: number) => new Promise<void>((r) => setTimeout(r, ms));

export class AnnotatorController {
  phase: Phase = "starting";
  current: QueryPayload | null = null;

  private panesReady = false;
  private staged: Verdict | null = null;
  private undoTimer: ReturnType<typeof setTimeout> | null = null;
  private stopped = false;
  private readonly undoGraceMs: number;
  private readonly sleep: (ms: number) => Promise<void>;
  private readonly idleBackoff: Backoff;
  private readonly retryBackoff: Backoff;

  constructor(
    private readonly api: AnnotationApi,
    private readonly renderer: Renderer,
    options: ControllerOptions = {},
  ) {
    this.undoGraceMs = options.undoGraceMs ?? 350;
    this.sleep = options.sleep ?? defaultSleep;
    this.idleBackoff = new Backoff(options.idlePollBaseMs ?? 500);
    this.retryBackoff = new Backoff(options.idlePollBaseMs ?? 500);
  }

  /** Main loop; returns when stop() is called. */
  async run(): Promise<void> {
    while (!this.stopped) {
      let result: NextQueryResult;
      try {
        result = await this.api.fetchNextQuery();
      } catch (err) {
        if (!(err instanceof NetworkError)) throw err;
        const delay = this.retryBackoff.next();
        this.phase = "retrying";
        this.renderer.showRetryBanner(delay);
        await this.sleep(delay);
        continue;
      }
      this.retryBackoff.reset();
      this.renderer.clearRetryBanner();

      if (result.kind === "idle") {
        this.phase = "idle";
        this.current = null;
        this.renderer.showIdle();
        await this.sleep(this.idleBackoff.next());
        continue;
      }
      this.idleBackoff.reset();
      await this.presentAndAwaitVerdict(result.query);
    }
  }

  stop(): void {
    this.stopped = true;
    if (this.undoTimer !== null) clearTimeout(this.undoTimer);
  }

  /** Keyboard entry point: S = same/positive, D = different/negative,
   * U = undo a staged verdict before it is submitted. */
  handleKey(key: string): void {
    const k = key.toLowerCase();
    if (k === "u") {
      this.undo();
      return;
    }
    if (k !== "s" && k !== "d") return;
    if (this.phase !== "showing" || !this.panesReady) return;
    this.stage(k === "s" ? "positive" : "negative");
  }

  private verdictDecided: ((v: Verdict) => void) | null = null;

  private async presentAndAwaitVerdict(query: QueryPayload): Promise<void> {
    this.current = query;
    this.panesReady = false;
    this.staged = null;
    this.phase = "showing";
    this.renderer.setStaged(null);
    await this.renderer.showQuery(query);
    this.panesReady = true;

    const verdict = await new Promise<Verdict>((resolve) => {
      this.verdictDecided = resolve;
    });
    this.verdictDecided = null;
    await this.submit(query, verdict);
  }

  private stage(verdict: Verdict): void {
    this.staged = verdict;
    this.phase = "staged";
    this.renderer.setStaged(verdict);
    if (this.undoGraceMs <= 0) {
      this.commitStaged();
      return;
    }
    this.undoTimer = setTimeout(() => this.commitStaged(), this.undoGraceMs);
  }

  private undo(): void {
    if (this.phase !== "staged") return;
    if (this.undoTimer !== null) {
      clearTimeout(this.undoTimer);
      this.undoTimer = null;
    }
    this.staged = null;
    this.phase = "showing";
    this.renderer.setStaged(null);
  }

  private commitStaged(): void {
    if (this.phase !== "staged" || this.staged === null) return;
    this.undoTimer = null;
    this.phase = "submitting";  // from here on keys are ignored
    this.verdictDecided?.(this.staged);
  }

  private async submit(query: QueryPayload, verdict: Verdict): Promise<void> {
    while (!this.stopped) {
      try {
        const result = await this.api.submitLabel(query.query_id, verdict);
        if (result.kind === "ok") {
          this.renderer.updateCost(result.m);
        } else if (result.kind === "expired") {
          this.renderer.showToast("assignment expired; fetching the next pair");
        } else {
          this.renderer.showToast("query disappeared; fetching the next pair");
        }
        return; // advance to fetchNext in the main loop
      } catch (err) {
        if (!(err instanceof NetworkError)) throw err;
        const delay = this.retryBackoff.next();
        this.renderer.showRetryBanner(delay);
        await this.sleep(delay);
      }
    }
  }
}
