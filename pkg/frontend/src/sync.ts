/** Sync pane: side-by-side frame stepper and the global timeline review.
 *
 * The stepper aligns one visual event across a video pair. Stepping is in
 * whole frames, so the tightest claim a human can make is one frame period;
 * the badge makes that lower bound explicit (33 ms at 30 FPS). Manual pairs
 * are sent to the sync job as hard edges; the timeline readback shows which
 * pairs came from audio and which were manual, plus any disconnected
 * timeline groups that no pair bridges.
 */

import type { JobSnapshot } from './types.js';

export interface PairAlignment {
  i: string;
  j: string;
  frameI: number;
  frameJ: number;
  fpsI: number;
  fpsJ: number;
}

/** Implied start offset start_j - start_i when frameI and frameJ show the
 * same instant: frame_i/fps_i - frame_j/fps_j. */
export function pairOffset(p: PairAlignment): number {
  return p.frameI / p.fpsI - p.frameJ / p.fpsJ;
}

/** One-frame quantization floor of the alignment, in milliseconds. */
export function uncertaintyMs(p: PairAlignment): number {
  return Math.round(1000 / Math.min(p.fpsI, p.fpsJ));
}

export function uncertaintyBadge(p: PairAlignment): string {
  return `±${uncertaintyMs(p)} ms`;
}

export function manualPayload(p: PairAlignment): { i: string; j: string; frame_i: number; frame_j: number } {
  return { i: p.i, j: p.j, frame_i: p.frameI, frame_j: p.frameJ };
}

export interface TimelineResult {
  starts: Record<string, number>;
  anchor: string;
  max_residual: number;
  components: string[][];
  low_confidence_pairs: string[][];
  offsets: { i: string; j: string; offset: number; confidence: number; method: string }[];
}

/** Disconnected timeline groups, largest first, members sorted. */
export function timelineGroups(tl: TimelineResult): string[][] {
  return [...tl.components]
    .map((c) => [...c].sort())
    .sort((a, b) => b.length - a.length || a[0].localeCompare(b[0]));
}

/** Label a clip-local instant in both clocks, e.g.
 * "clip 1.234 s / global 3.334 s". */
export function bothClocks(start: number | null, localT: number): string {
  const clip = `clip ${localT.toFixed(3)} s`;
  if (start === null) return `${clip} / global unsynced`;
  return `${clip} / global ${(start + localT).toFixed(3)} s`;
}

export interface SyncDeps {
  submitSync(manual: ReturnType<typeof manualPayload>[]): Promise<JobSnapshot>;
  waitJob(id: string): Promise<JobSnapshot>;
  fetchTimeline(): Promise<TimelineResult>;
}

export class SyncController {
  pairs: PairAlignment[] = [];
  timeline: TimelineResult | null = null;
  status = '';

  constructor(private deps: SyncDeps) {}

  addPair(i: string, j: string, fpsI: number, fpsJ: number): PairAlignment {
    const p: PairAlignment = { i, j, frameI: 0, frameJ: 0, fpsI, fpsJ };
    this.pairs.push(p);
    return p;
  }

  step(p: PairAlignment, which: 'i' | 'j', frames: number): void {
    if (which === 'i') p.frameI = Math.max(0, p.frameI + frames);
    else p.frameJ = Math.max(0, p.frameJ + frames);
  }

  /** Run the sync job with every stepper pair as a manual edge, then pull
   * the timeline back. Frame range errors from the service surface in
   * status instead of throwing at the caller. */
  async apply(): Promise<boolean> {
    this.status = 'syncing';
    try {
      const job = await this.deps.submitSync(this.pairs.map(manualPayload));
      await this.deps.waitJob(job.id);
      this.timeline = await this.deps.fetchTimeline();
      this.status = 'synced';
      return true;
    } catch (err) {
      this.status = err instanceof Error ? err.message : String(err);
      return false;
    }
  }
}
