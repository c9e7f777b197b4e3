/** Trailing-edge debouncer: rapid calls within the window collapse into one
 * invocation with the latest argument. */

export class Debouncer<T> {
  private timer: ReturnType<typeof setTimeout> | null = null;
  private pending: T | undefined;

  constructor(
    private delayMs: number,
    private action: (value: T) => void,
  ) {}

  push(value: T): void {
    this.pending = value;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      const value = this.pending as T;
      this.pending = undefined;
      this.action(value);
    }, this.delayMs);
  }

  /** Cancel without firing. */
  cancel(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.pending = undefined;
  }

  /** Fire immediately if something is pending. */
  flush(): void {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
      const value = this.pending as T;
      this.pending = undefined;
      this.action(value);
    }
  }
}
