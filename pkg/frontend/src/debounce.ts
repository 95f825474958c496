/** Trailing-edge debounce with an imperative flush and cancel.
 *
 * The map drag loop relies on the imperative handles: mid-drag moves keep
 * rescheduling the preview, a drop cancels it outright and commits once.
 */

export interface Debounced<A extends unknown[]> {
  call(...args: A): void;
  /** Run the pending invocation now, if any. */
  flush(): void;
  /** Drop the pending invocation, if any. */
  cancel(): void;
  pending(): boolean;
}

export function debounce<A extends unknown[]>(fn: (...args: A) => void, waitMs: number): Debounced<A> {
  let timer: ReturnType<typeof setTimeout> | null = null;
  let lastArgs: A | null = null;

  const clear = (): void => {
    if (timer !== null) {
      clearTimeout(timer);
      timer = null;
    }
  };

  return {
    call(...args: A): void {
      lastArgs = args;
      clear();
      timer = setTimeout(() => {
        timer = null;
        const a = lastArgs as A;
        lastArgs = null;
        fn(...a);
      }, waitMs);
    },
    flush(): void {
      if (timer === null) return;
      clear();
      const a = lastArgs as A;
      lastArgs = null;
      fn(...a);
    },
    cancel(): void {
      clear();
      lastArgs = null;
    },
    pending(): boolean {
      return timer !== null;
    },
  };
}
