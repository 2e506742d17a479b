/** Exponential backoff for polling and retries, capped at 10 s. */

export const BACKOFF_CAP_MS = 10_000;

export class Backoff {
  private attempt = 0;

  constructor(private readonly baseMs = 500, private readonly capMs = BACKOFF_CAP_MS) {}

  /** Delay for the next attempt, doubling from base up to the cap. */
  next(): number {
    const delay = Math.min(this.baseMs * 2 ** this.attempt, this.capMs);
    this.attempt += 1;
    return delay;
  }

  reset(): void {
    this.attempt = 0;
  }

  get attempts(): number {
    return this.attempt;
  }
}
