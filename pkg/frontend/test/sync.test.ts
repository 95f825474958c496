import { describe, expect, it, vi } from 'vitest';

import { ApiError } from '../src/api.js';
import {
  bothClocks,
  manualPayload,
  pairOffset,
  SyncController,
  type SyncDeps,
  timelineGroups,
  type TimelineResult,
  uncertaintyBadge,
  uncertaintyMs,
} from '../src/sync.js';
import type { JobSnapshot } from '../src/types.js';

describe('frame stepper math', () => {
  it('frame 30 against frame 0 at 30 FPS is a 1.0 s offset', () => {
    const p = { i: 'v1', j: 'v2', frameI: 30, frameJ: 0, fpsI: 30, fpsJ: 30 };
    expect(pairOffset(p)).toBeCloseTo(1.0, 12);
    expect(manualPayload(p)).toEqual({ i: 'v1', j: 'v2', frame_i: 30, frame_j: 0 });
  });

  it('a 30 FPS alignment displays the 33 ms uncertainty badge', () => {
    const p = { i: 'v1', j: 'v2', frameI: 30, frameJ: 0, fpsI: 30, fpsJ: 30 };
    expect(uncertaintyMs(p)).toBe(33);
    expect(uncertaintyBadge(p)).toBe('±33 ms');
  });

  it('mixed frame rates quantize at the slower camera', () => {
    const p = { i: 'v1', j: 'v2', frameI: 12, frameJ: 50, fpsI: 24, fpsJ: 60 };
    expect(pairOffset(p)).toBeCloseTo(12 / 24 - 50 / 60, 12);
    expect(uncertaintyMs(p)).toBe(42); // 1000/24
    expect(uncertaintyBadge(p)).toBe('±42 ms');
  });

  it('labels instants in both the clip clock and the global clock', () => {
    expect(bothClocks(2.1, 1.234)).toBe('clip 1.234 s / global 3.334 s');
    expect(bothClocks(null, 0.5)).toBe('clip 0.500 s / global unsynced');
  });
});

const TIMELINE: TimelineResult = {
  starts: { v1: 0.0, v2: 1.5, v3: -2.25, v9: 0.0 },
  anchor: 'v1',
  max_residual: 0.0021,
  components: [
    ['v2', 'v1', 'v3'],
    ['v9'],
  ],
  low_confidence_pairs: [['v1', 'v3']],
  offsets: [
    { i: 'v1', j: 'v2', offset: 1.5, confidence: 0.92, method: 'audio' },
    { i: 'v1', j: 'v3', offset: -2.25, confidence: 0.31, method: 'audio' },
    { i: 'v2', j: 'v3', offset: -3.75, confidence: 1.0, method: 'manual' },
  ],
};

describe('timeline review', () => {
  it('disconnected videos land in separate timeline groups', () => {
    const groups = timelineGroups(TIMELINE);
    expect(groups).toEqual([['v1', 'v2', 'v3'], ['v9']]);
  });

  it('applies manual pairs through the sync job and pulls the timeline back', async () => {
    const submitted: unknown[] = [];
    const deps: SyncDeps = {
      submitSync: async (manual) => {
        submitted.push(manual);
        const snap: JobSnapshot = { id: 'j7', kind: 'sync', status: 'queued', progress: 0, error: null, result: null };
        return snap;
      },
      waitJob: async (id) => ({ id, kind: 'sync', status: 'done', progress: 1, error: null, result: null }),
      fetchTimeline: async () => TIMELINE,
    };
    const ctl = new SyncController(deps);
    const pair = ctl.addPair('v1', 'v2', 30, 30);
    ctl.step(pair, 'i', 30);
    expect(await ctl.apply()).toBe(true);
    expect(submitted[0]).toEqual([{ i: 'v1', j: 'v2', frame_i: 30, frame_j: 0 }]);
    expect(ctl.timeline).toEqual(TIMELINE);
    expect(ctl.status).toBe('synced');
  });

  it('stepping never goes below frame zero', () => {
    const ctl = new SyncController({} as SyncDeps);
    const pair = ctl.addPair('v1', 'v2', 30, 30);
    ctl.step(pair, 'j', -5);
    expect(pair.frameJ).toBe(0);
    ctl.step(pair, 'j', 2);
    ctl.step(pair, 'j', -1);
    expect(pair.frameJ).toBe(1);
  });

  it('surfaces a frame range rejection in the status line', async () => {
    const deps: SyncDeps = {
      submitSync: async () => {
        throw new ApiError(422, 'FrameOutOfRange', 'frame 900 is 30.0 s into a 4.0 s clip');
      },
      waitJob: vi.fn(),
      fetchTimeline: vi.fn(),
    };
    const ctl = new SyncController(deps);
    ctl.addPair('v1', 'v2', 30, 30);
    expect(await ctl.apply()).toBe(false);
    expect(ctl.status).toContain('FrameOutOfRange');
    expect(deps.waitJob).not.toHaveBeenCalled();
  });
});
