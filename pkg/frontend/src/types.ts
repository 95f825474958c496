/** Wire shapes served by the shotloc HTTP service, plus the client view state. */

export interface Position {
  lat: number;
  lon: number;
  elev: number;
}

export interface Marking {
  kind: 'shock' | 'muzzle';
  t: number;
  event: number;
}

export interface VideoDoc {
  id: string;
  name: string;
  fps: number;
  duration: number;
  start: number | null;
  position: Position | null;
  markings: Marking[];
}

export interface EstimateRecord {
  id: string;
  kind: string;
  inputs: Record<string, unknown>;
  params: Record<string, unknown>;
  result: Record<string, unknown>;
}

export interface CollectionDoc {
  id: string;
  name: string;
  version: number;
  frame_origin: { lat: number; lon: number } | null;
  videos: VideoDoc[];
  estimates: EstimateRecord[];
}

export interface JobSnapshot {
  id: string;
  kind: string;
  status: 'queued' | 'running' | 'done' | 'error';
  progress: number;
  error: string | null;
  result: Record<string, unknown> | null;
}

export interface Feature {
  type: 'Feature';
  geometry: { type: string; coordinates: unknown };
  properties: Record<string, unknown>;
}

export interface FeatureCollection {
  type: 'FeatureCollection';
  features: Feature[];
}

/** One renderable map layer, always traceable to the estimate record it came from. */
export interface MapLayer {
  estimate: string;
  kind: string;
  features: Feature[];
}

export interface MarkerState {
  video: string;
  lat: number;
  lon: number;
  /** false while the position only exists client-side (mid-drag). */
  committed: boolean;
}

export interface ViewState {
  collection: string | null;
  gunshot: number;
  markers: Record<string, MarkerState>;
  pendingJobs: string[];
  layers: MapLayer[];
}

export interface DetectCandidate {
  t: number;
  score_db: number;
}
