/** Client view state and its pure transitions.
 *
 * Everything here is rebuildable from the persisted collection document:
 * reloading the page calls hydrate() and gets back exactly the committed
 * picture. Uncommitted drag positions and pending job ids are deliberately
 * lost on reload.
 */

import type { CollectionDoc, MapLayer, MarkerState, ViewState } from './types.js';

export function initialState(): ViewState {
  return { collection: null, gunshot: 0, markers: {}, pendingJobs: [], layers: [] };
}

/** Rebuild marker state from the persisted document. */
export function hydrate(state: ViewState, doc: CollectionDoc): ViewState {
  const markers: Record<string, MarkerState> = {};
  for (const v of doc.videos) {
    if (v.position) {
      markers[v.id] = { video: v.id, lat: v.position.lat, lon: v.position.lon, committed: true };
    }
  }
  return { ...state, collection: doc.id, markers };
}

/** Optimistic mid-drag move; the marker renders as uncommitted until a PUT lands. */
export function moveMarker(state: ViewState, video: string, lat: number, lon: number): ViewState {
  const markers = { ...state.markers, [video]: { video, lat, lon, committed: false } };
  return { ...state, markers };
}

export function commitMarker(state: ViewState, video: string): ViewState {
  const m = state.markers[video];
  if (!m) return state;
  const markers = { ...state.markers, [video]: { ...m, committed: true } };
  return { ...state, markers };
}

/** Roll an optimistic move back to the last persisted fix (or remove it). */
export function revertMarker(
  state: ViewState,
  video: string,
  persisted: { lat: number; lon: number } | null,
): ViewState {
  const markers = { ...state.markers };
  if (persisted === null) {
    delete markers[video];
  } else {
    markers[video] = { video, lat: persisted.lat, lon: persisted.lon, committed: true };
  }
  return { ...state, markers };
}

export function addJob(state: ViewState, jobId: string): ViewState {
  if (state.pendingJobs.includes(jobId)) return state;
  return { ...state, pendingJobs: [...state.pendingJobs, jobId] };
}

export function removeJob(state: ViewState, jobId: string): ViewState {
  return { ...state, pendingJobs: state.pendingJobs.filter((j) => j !== jobId) };
}

export function setLayers(state: ViewState, layers: MapLayer[]): ViewState {
  return { ...state, layers };
}

export function setGunshot(state: ViewState, gunshot: number): ViewState {
  return { ...state, gunshot };
}
