import { afterEach, beforeEach, describe, expect, it, vi } from 'vitest';

import { pollJob } from '../src/jobs.js';
import type { JobSnapshot } from '../src/types.js';

function snapshot(status: JobSnapshot['status'], progress: number, error: string | null = null): JobSnapshot {
  return { id: 'j1', kind: 'estimate_m1', status, progress, error, result: null };
}

describe('job polling', () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it('backs off 200, 300, 450 ms and resolves when the job is done', async () => {
    let status: JobSnapshot['status'] = 'running';
    const fetchJob = vi.fn(async () => snapshot(status, status === 'done' ? 1 : 0.5));
    const seen: number[] = [];
    const p = pollJob('j1', { fetchJob, onProgress: (j) => seen.push(j.progress) });

    await vi.advanceTimersByTimeAsync(199);
    expect(fetchJob).toHaveBeenCalledTimes(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(fetchJob).toHaveBeenCalledTimes(1);
    await vi.advanceTimersByTimeAsync(300);
    expect(fetchJob).toHaveBeenCalledTimes(2);
    await vi.advanceTimersByTimeAsync(449);
    expect(fetchJob).toHaveBeenCalledTimes(2);
    await vi.advanceTimersByTimeAsync(1);
    expect(fetchJob).toHaveBeenCalledTimes(3);

    status = 'done';
    await vi.advanceTimersByTimeAsync(675);
    const job = await p;
    expect(job.status).toBe('done');
    expect(fetchJob).toHaveBeenCalledTimes(4);
    expect(seen).toEqual([0.5, 0.5, 0.5, 1]);
  });

  it('caps the poll interval', async () => {
    let calls = 0;
    const fetchJob = vi.fn(async () => {
      calls += 1;
      return snapshot(calls >= 12 ? 'done' : 'running', 0.1);
    });
    const p = pollJob('j1', { fetchJob, initialMs: 100, maxMs: 250, factor: 3 });
    // schedule: 100, then 250 forever (100*3 clamps to 250)
    await vi.advanceTimersByTimeAsync(100 + 11 * 250);
    await expect(p).resolves.toMatchObject({ status: 'done' });
    expect(fetchJob).toHaveBeenCalledTimes(12);
  });

  it('rejects with the job error message on failure', async () => {
    const fetchJob = vi.fn(async () => snapshot('error', 0.3, 'band infeasible: ranges exceed separation'));
    const p = pollJob('j1', { fetchJob });
    const caught = p.catch((e: Error) => e.message);
    await vi.advanceTimersByTimeAsync(200);
    expect(await caught).toContain('band infeasible');
    expect(fetchJob).toHaveBeenCalledTimes(1);
  });

  it('rejects when the poll request itself fails', async () => {
    const fetchJob = vi.fn(async () => {
      throw new Error('http 401');
    });
    const p = pollJob('j1', { fetchJob });
    const caught = p.catch((e: Error) => e.message);
    await vi.advanceTimersByTimeAsync(200);
    expect(await caught).toBe('http 401');
  });
});
