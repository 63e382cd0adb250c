// Debounced latest-value request scheduling with stale-response discard.
//
// A slider emits bursts; only the newest value matters. Requests are rate
// limited to one per `minIntervalMs` (default 100 ms, i.e. at most 10/s) and
// a response is applied only if no newer request has been issued since.

export class LatestRequestScheduler<V, R> {
  private seq = 0;
  private timer: ReturnType<typeof setTimeout> | null = null;
  private queued: V | null = null;
  private lastIssuedAt = -Infinity;

  constructor(
    private readonly send: (value: V) => Promise<R>,
    private readonly apply: (result: R, value: V) => void,
    private readonly onError: (err: unknown) => void = () => undefined,
    private readonly minIntervalMs = 100,
  ) {}

  /** Record the newest value; it is sent as soon as the rate window allows. */
  request(value: V): void {
    this.queued = value;
    if (this.timer !== null) return; // the newest value rides the pending window
    const wait = Math.max(0, this.lastIssuedAt + this.minIntervalMs - Date.now());
    if (wait === 0) {
      this.flush();
    } else {
      this.timer = setTimeout(() => this.flush(), wait);
    }
  }

  /** Number of requests actually issued (for tests and diagnostics). */
  get issuedCount(): number {
    return this.seq;
  }

  private flush(): void {
    this.timer = null;
    if (this.queued === null) return;
    const value = this.queued;
    this.queued = null;
    this.lastIssuedAt = Date.now();
    const seq = ++this.seq;
    this.send(value).then(
      (result) => {
        if (seq === this.seq) this.apply(result, value); // discard stale responses
      },
      (err) => {
        if (seq === this.seq) this.onError(err);
      },
    );
  }
}
