/**
 * Trailing debounce: rapid trigger bursts collapse into one call that fires
 * after the burst goes quiet, so at most one request leaves per window.
 */
export class Debounced<T> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: T | undefined;

  constructor(
    private readonly fn: (value: T) => void,
    private readonly delayMs: number,
  ) {}

  trigger(value: T): void {
    this.pending = value;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      const value = this.pending as T;
      this.pending = undefined;
      this.fn(value);
    }, this.delayMs);
  }

  /** Fire the pending call immediately, if any. */
  flush(): void {
    if (this.timer === null) return;
    clearTimeout(this.timer);
    this.timer = null;
    const value = this.pending as T;
    this.pending = undefined;
    this.fn(value);
  }

  cancel(): void {
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = null;
    this.pending = undefined;
  }

  get hasPending(): boolean {
    return this.timer !== null;
  }
}
