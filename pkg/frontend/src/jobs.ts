/** Job polling with per-job exponential backoff.
 *
 * Each submitted job gets its own timer chain: 200 ms to start, grows by
 * 1.5x per poll, capped at 2 s. Resolves when the job reports done and
 * rejects when it reports error, so callers can keep stale layers visible
 * instead of painting a failed estimate.
 */

import * as api from './api.js';
import type { JobSnapshot } from './types.js';

export interface PollOptions {
  initialMs?: number;
  maxMs?: number;
  factor?: number;
  onProgress?: (job: JobSnapshot) => void;
  /** Injection point for tests; defaults to the live API. */
  fetchJob?: (id: string) => Promise<JobSnapshot>;
}

export function pollJob(jobId: string, opts: PollOptions = {}): Promise<JobSnapshot> {
  const initial = opts.initialMs ?? 200;
  const max = opts.maxMs ?? 2000;
  const factor = opts.factor ?? 1.5;
  const fetchJob = opts.fetchJob ?? ((id: string) => api.get<JobSnapshot>(`/jobs/${id}`));

  return new Promise((resolve, reject) => {
    let wait = initial;
    const tick = (): void => {
      fetchJob(jobId).then(
        (job) => {
          opts.onProgress?.(job);
          if (job.status === 'done') {
            resolve(job);
            return;
          }
          if (job.status === 'error') {
            reject(new Error(job.error ?? 'job failed'));
            return;
          }
          wait = Math.min(wait * factor, max);
          setTimeout(tick, wait);
        },
        (err) => reject(err),
      );
    };
    setTimeout(tick, wait);
  });
}
