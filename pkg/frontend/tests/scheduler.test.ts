import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { LatestRequestScheduler } from "../src/scheduler.js";

describe("LatestRequestScheduler", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });

  afterEach(() => {
    vi.useRealTimers();
  });

  it("discards stale responses during a scripted burst of 20 moves", async () => {
    // Every request resolves, slow ones slower, so early responses land after
    // later requests were issued; only the newest may be applied.
    const applied: number[] = [];
    const resolvers: Array<() => void> = [];
    const scheduler = new LatestRequestScheduler<number, number>(
      (value) =>
        new Promise((resolve) => {
          resolvers.push(() => resolve(value));
        }),
      (result) => applied.push(result),
    );

    for (let i = 0; i < 20; i++) {
      scheduler.request(i / 19);
      await vi.advanceTimersByTimeAsync(25); // 40 moves/s burst
    }
    await vi.advanceTimersByTimeAsync(500); // let the trailing window flush

    // Resolve every in-flight request out of order: oldest last.
    for (const resolve of [...resolvers].reverse()) resolve();
    await vi.advanceTimersByTimeAsync(0);

    expect(applied).toEqual([1]); // only the final slider value is applied
  });

  it("rate limits bursts to at most 10 requests per second", async () => {
    let sent = 0;
    const scheduler = new LatestRequestScheduler<number, number>(
      async (value) => {
        sent += 1;
        return value;
      },
      () => undefined,
    );
    for (let i = 0; i < 100; i++) {
      scheduler.request(i);
      await vi.advanceTimersByTimeAsync(10); // 100 moves over 1 s
    }
    expect(sent).toBeLessThanOrEqual(11); // 10/s plus the leading edge
    expect(sent).toBeGreaterThanOrEqual(9);
  });

  it("always ends on the newest value", async () => {
    const applied: number[] = [];
    const scheduler = new LatestRequestScheduler<number, number>(
      async (value) => value,
      (result) => applied.push(result),
    );
    scheduler.request(0.2);
    scheduler.request(0.4);
    scheduler.request(0.9); // same window: only the newest goes out
    await vi.advanceTimersByTimeAsync(300);
    expect(applied[applied.length - 1]).toBe(0.9);
    expect(applied).not.toContain(0.4);
  });

  it("reports errors without applying and keeps working afterwards", async () => {
    const applied: number[] = [];
    const errors: unknown[] = [];
    let fail = true;
    const scheduler = new LatestRequestScheduler<number, number>(
      async (value) => {
        if (fail) throw new Error("boom");
        return value;
      },
      (result) => applied.push(result),
      (err) => errors.push(err),
    );
    scheduler.request(0.5);
    await vi.advanceTimersByTimeAsync(200);
    expect(errors.length).toBe(1);
    expect(applied).toEqual([]);

    fail = false;
    scheduler.request(0.7);
    await vi.advanceTimersByTimeAsync(200);
    expect(applied).toEqual([0.7]);
  });
});
