/** Marking pane: spectrogram canvas, power graph, and shock/muzzle marks.
 *
 * The spectrogram arrives as a griddump text artifact (rows are analysis
 * frames, columns are frequency bins). Clicks snap to frame centers, so a
 * mark can never be placed between two analysis frames. The view never
 * recomputes audio features client-side; the power graph is a per-frame
 * mean of the served grid, which is a display transform, not analysis.
 */

import type { DetectCandidate, Marking } from './types.js';

export interface Grid {
  rows: number;
  cols: number;
  meta: Record<string, string>;
  values: Float64Array;
}

const MAGIC = '#griddump v1';

/** Parse the griddump text format into a dense row-major grid. */
export function parseGriddump(text: string): Grid {
  const lines = text.split('\n');
  if (lines[0] !== MAGIC) throw new Error('not a griddump artifact');
  const meta: Record<string, string> = {};
  let rows = -1;
  let cols = -1;
  let cursor = 1;
  while (cursor < lines.length) {
    const line = lines[cursor];
    cursor += 1;
    if (line === '') continue;
    const sp = line.indexOf(' ');
    if (sp < 0) throw new Error(`bad header line: ${line}`);
    const key = line.slice(0, sp);
    const value = line.slice(sp + 1);
    if (key === 'rows') {
      rows = Number(value);
    } else if (key === 'cols') {
      cols = Number(value);
      break;
    } else {
      meta[key] = value;
    }
  }
  if (rows < 0 || cols < 0) throw new Error('griddump header missing rows/cols');
  const values = new Float64Array(rows * cols);
  for (let r = 0; r < rows; r += 1) {
    const parts = lines[cursor + r].split(' ');
    if (parts.length !== cols) throw new Error(`row ${r} has ${parts.length} values, expected ${cols}`);
    for (let c = 0; c < cols; c += 1) values[r * cols + c] = Number(parts[c]);
  }
  return { rows, cols, meta, values };
}

export interface Spectrogram extends Grid {
  rate: number;
  window: number;
  hop: number;
}

export function spectrogramFromDump(text: string): Spectrogram {
  const grid = parseGriddump(text);
  if (grid.meta.kind !== 'spectrogram') throw new Error(`expected a spectrogram grid, got ${grid.meta.kind}`);
  const rate = Number(grid.meta.rate);
  const window = Number(grid.meta.window);
  const hop = Number(grid.meta.hop);
  if (!(rate > 0) || !(window > 0) || !(hop > 0)) throw new Error('spectrogram meta incomplete');
  return { ...grid, rate, window, hop };
}

/** Center time of analysis frame k in clip seconds. */
export function frameTime(sg: Spectrogram, k: number): number {
  return (sg.window / 2 + k * sg.hop) / sg.rate;
}

/** Nearest analysis frame index for a clip time, clamped into range. */
export function frameAt(sg: Spectrogram, t: number): number {
  const k = Math.round((t * sg.rate - sg.window / 2) / sg.hop);
  return Math.min(Math.max(k, 0), sg.rows - 1);
}

/** Snap an arbitrary clip time onto the spectrogram frame lattice. */
export function snapToFrame(sg: Spectrogram, t: number): number {
  return frameTime(sg, frameAt(sg, t));
}

/** Horizontal view transform: frame lattice to canvas pixels. */
export interface SpectroView {
  pxPerFrame: number;
  originFrame: number;
}

export function xAtTime(sg: Spectrogram, view: SpectroView, t: number): number {
  const k = (t * sg.rate - sg.window / 2) / sg.hop;
  return (k - view.originFrame) * view.pxPerFrame;
}

export function timeAtX(sg: Spectrogram, view: SpectroView, x: number): number {
  const k = view.originFrame + x / view.pxPerFrame;
  return (sg.window / 2 + k * sg.hop) / sg.rate;
}

/** Zoom about an anchor pixel; the time under the anchor stays put, so
 * already-placed marks keep their on-screen alignment. */
export function zoomView(view: SpectroView, factor: number, anchorX: number): SpectroView {
  const anchorFrame = view.originFrame + anchorX / view.pxPerFrame;
  const pxPerFrame = view.pxPerFrame * factor;
  return { pxPerFrame, originFrame: anchorFrame - anchorX / pxPerFrame };
}

/** Per-frame mean level, the power graph drawn under the spectrogram. */
export function powerGraph(sg: Spectrogram): Float64Array {
  const out = new Float64Array(sg.rows);
  for (let r = 0; r < sg.rows; r += 1) {
    let acc = 0;
    for (let c = 0; c < sg.cols; c += 1) acc += sg.values[r * sg.cols + c];
    out[r] = acc / sg.cols;
  }
  return out;
}

export const SHOCK_BEFORE_MUZZLE = 'the shockwave must precede the muzzle blast';

export interface MarkingState {
  video: string;
  event: number;
  shock: number | null;
  muzzle: number | null;
  error: string;
}

export function emptyMarks(video: string, event = 0): MarkingState {
  return { video, event, shock: null, muzzle: null, error: '' };
}

/** Place a mark from a canvas click; the time snaps to the frame lattice. */
export function markAt(
  state: MarkingState,
  sg: Spectrogram,
  view: SpectroView,
  kind: 'shock' | 'muzzle',
  x: number,
): MarkingState {
  const t = snapToFrame(sg, timeAtX(sg, view, x));
  return { ...state, [kind]: t, error: '' };
}

/** Accepting a detector suggestion is the same operation as a manual click
 * at the suggested time; the resulting payload is byte-identical. */
export function acceptSuggestion(
  state: MarkingState,
  sg: Spectrogram,
  kind: 'shock' | 'muzzle',
  candidate: DetectCandidate,
): MarkingState {
  const t = snapToFrame(sg, candidate.t);
  return { ...state, [kind]: t, error: '' };
}

/** Client-side gate mirroring the server integrity rule. */
export function validateMarks(state: MarkingState): string {
  if (state.shock === null || state.muzzle === null) return 'both marks are required';
  if (state.shock >= state.muzzle) return SHOCK_BEFORE_MUZZLE;
  return '';
}

export function markingsPayload(state: MarkingState, version: number): {
  markings: { event: number; shock: number; muzzle: number }[];
  version: number;
} {
  return {
    markings: [{ event: state.event, shock: state.shock as number, muzzle: state.muzzle as number }],
    version,
  };
}

export interface MarkingDeps {
  fetchSpectrogram(video: string): Promise<string>;
  putMarkings(video: string, payload: ReturnType<typeof markingsPayload>): Promise<unknown>;
  detect(video: string): Promise<DetectCandidate[]>;
  docVersion(): number;
  persistedMarks(video: string): Marking[];
}

export class MarkingController {
  state: MarkingState;
  sg: Spectrogram | null = null;
  view: SpectroView = { pxPerFrame: 2, originFrame: 0 };
  suggestions: DetectCandidate[] = [];

  constructor(
    private deps: MarkingDeps,
    video: string,
  ) {
    this.state = emptyMarks(video);
  }

  async load(): Promise<void> {
    const text = await this.deps.fetchSpectrogram(this.state.video);
    this.sg = spectrogramFromDump(text);
    for (const m of this.deps.persistedMarks(this.state.video)) {
      if (m.event !== this.state.event) continue;
      if (m.kind === 'shock') this.state = { ...this.state, shock: m.t };
      if (m.kind === 'muzzle') this.state = { ...this.state, muzzle: m.t };
    }
  }

  clickAt(kind: 'shock' | 'muzzle', x: number): void {
    if (!this.sg) return;
    this.state = markAt(this.state, this.sg, this.view, kind, x);
  }

  accept(kind: 'shock' | 'muzzle', candidate: DetectCandidate): void {
    if (!this.sg) return;
    this.state = acceptSuggestion(this.state, this.sg, kind, candidate);
  }

  zoom(factor: number, anchorX: number): void {
    this.view = zoomView(this.view, factor, anchorX);
  }

  /** Returns true when the PUT was sent and accepted. */
  async save(): Promise<boolean> {
    const problem = validateMarks(this.state);
    if (problem !== '') {
      this.state = { ...this.state, error: problem };
      return false;
    }
    try {
      await this.deps.putMarkings(this.state.video, markingsPayload(this.state, this.deps.docVersion()));
      this.state = { ...this.state, error: '' };
      return true;
    } catch (err) {
      this.state = { ...this.state, error: err instanceof Error ? err.message : String(err) };
      return false;
    }
  }

  async suggest(): Promise<void> {
    this.suggestions = await this.deps.detect(this.state.video);
  }
}
