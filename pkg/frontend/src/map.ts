/** Map pane: camera markers over estimate layers, with drag based what-if.
 *
 * Drag protocol. Every pointer move updates the marker optimistically and
 * reschedules a 300 ms debounced preview commit; the drop cancels whatever
 * preview is still pending and commits once. A single continuous drag that
 * ends in a drop therefore emits exactly one camera-fix PUT followed by
 * exactly one estimate job. Only a mid-drag rest longer than the debounce
 * window produces an extra what-if round trip, which is the point of it.
 *
 * Failure handling. A rejected PUT (version conflict, bad fix) rolls the
 * marker back to the last persisted position and surfaces the server
 * message inline. A failed estimate job (for example an infeasible band
 * after an aggressive move) keeps the previous layers on screen and raises
 * a warning badge instead of blanking the map.
 */

import { debounce, type Debounced } from './debounce.js';
import { buildLayers } from './layers.js';
import {
  addJob,
  commitMarker,
  hydrate,
  initialState,
  moveMarker,
  removeJob,
  revertMarker,
  setGunshot,
  setLayers,
} from './state.js';
import type { CollectionDoc, Feature, FeatureCollection, JobSnapshot, ViewState } from './types.js';

export interface MapDeps {
  fetchDoc(): Promise<CollectionDoc>;
  fetchGeojson(gunshot: number): Promise<FeatureCollection>;
  putFix(video: string, lat: number, lon: number, version: number): Promise<unknown>;
  submitEstimate(video: string): Promise<JobSnapshot>;
  waitJob(id: string): Promise<JobSnapshot>;
}

export class MapController {
  state: ViewState;
  cameras: Feature[] = [];
  lastError = '';
  warning = '';
  private doc: CollectionDoc | null = null;
  private preview: Debounced<[string]>;
  private inflight: Promise<void> = Promise.resolve();

  constructor(
    private deps: MapDeps,
    previewMs = 300,
  ) {
    this.state = initialState();
    this.preview = debounce((video: string) => {
      this.inflight = this.commit(video);
    }, previewMs);
  }

  async load(): Promise<void> {
    this.doc = await this.deps.fetchDoc();
    this.state = hydrate(this.state, this.doc);
    await this.redraw();
  }

  async selectGunshot(gunshot: number): Promise<void> {
    this.state = setGunshot(this.state, gunshot);
    await this.redraw();
  }

  async redraw(): Promise<void> {
    const fc = await this.deps.fetchGeojson(this.state.gunshot);
    const grouped = buildLayers(fc);
    this.cameras = grouped.cameras;
    this.state = setLayers(this.state, grouped.layers);
  }

  /** Pointer move during a drag: optimistic position, debounced preview. */
  dragTo(video: string, lat: number, lon: number): void {
    this.lastError = '';
    this.state = moveMarker(this.state, video, lat, lon);
    this.preview.call(video);
  }

  /** Drop: collapse any pending preview into one immediate commit. */
  async drop(video: string): Promise<void> {
    this.preview.cancel();
    await this.inflight;
    await this.commit(video);
  }

  private async commit(video: string): Promise<void> {
    if (!this.doc) return;
    const m = this.state.markers[video];
    if (!m || m.committed) return;
    const persisted = this.doc.videos.find((v) => v.id === video)?.position ?? null;
    try {
      await this.deps.putFix(video, m.lat, m.lon, this.doc.version);
      this.doc = await this.deps.fetchDoc();
      this.state = commitMarker(this.state, video);
    } catch (err) {
      this.state = revertMarker(this.state, video, persisted);
      this.lastError = err instanceof Error ? err.message : String(err);
      return;
    }
    const previous = this.state.layers;
    let jobId = '';
    try {
      const job = await this.deps.submitEstimate(video);
      jobId = job.id;
      this.state = addJob(this.state, jobId);
      await this.deps.waitJob(jobId);
      await this.redraw();
      this.warning = '';
    } catch (err) {
      // keep the stale layers visible; an infeasible what-if is a
      // warning, not a blank map
      this.state = setLayers(this.state, previous);
      this.warning = err instanceof Error ? err.message : String(err);
    } finally {
      if (jobId !== '') this.state = removeJob(this.state, jobId);
    }
  }
}
