/** DOM and canvas painters. All functions here are pure consumers of
 * already-fetched state; nothing in this file talks to the network.
 */

import { coordBounds, project, unproject } from './geo.js';
import { layerLabel } from './layers.js';
import { frameTime, powerGraph, type Spectrogram, type SpectroView, xAtTime } from './marking.js';
import { bothClocks, timelineGroups, type TimelineResult } from './sync.js';
import type { Feature, MapLayer, MarkerState, VideoDoc } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface MapViewport {
  zoom: number;
  originX: number;
  originY: number;
  width: number;
  height: number;
}

/** Fit a viewport around everything drawable, with a margin. */
export function fitViewport(features: Feature[], width: number, height: number): MapViewport {
  let minLat = Infinity;
  let maxLat = -Infinity;
  let minLon = Infinity;
  let maxLon = -Infinity;
  for (const f of features) {
    const b = coordBounds(f.geometry.coordinates);
    minLat = Math.min(minLat, b.minLat);
    maxLat = Math.max(maxLat, b.maxLat);
    minLon = Math.min(minLon, b.minLon);
    maxLon = Math.max(maxLon, b.maxLon);
  }
  if (!Number.isFinite(minLat)) {
    return { zoom: 2, originX: 0, originY: 0, width, height };
  }
  let zoom = 18;
  while (zoom > 1) {
    const a = project({ lat: maxLat, lon: minLon }, zoom);
    const b = project({ lat: minLat, lon: maxLon }, zoom);
    if (b.x - a.x <= width * 0.85 && b.y - a.y <= height * 0.85) break;
    zoom -= 1;
  }
  const a = project({ lat: maxLat, lon: minLon }, zoom);
  const b = project({ lat: minLat, lon: maxLon }, zoom);
  return {
    zoom,
    originX: (a.x + b.x) / 2 - width / 2,
    originY: (a.y + b.y) / 2 - height / 2,
    width,
    height,
  };
}

export function toScreen(vp: MapViewport, lat: number, lon: number): { x: number; y: number } {
  const p = project({ lat, lon }, vp.zoom);
  return { x: p.x - vp.originX, y: p.y - vp.originY };
}

export function fromScreen(vp: MapViewport, x: number, y: number): { lat: number; lon: number } {
  return unproject(x + vp.originX, y + vp.originY, vp.zoom);
}

function pathFrom(vp: MapViewport, rings: number[][][]): string {
  const parts: string[] = [];
  for (const ring of rings) {
    const cmds = ring.map((c, i) => {
      const { x, y } = toScreen(vp, c[1], c[0]);
      return `${i === 0 ? 'M' : 'L'}${x.toFixed(1)} ${y.toFixed(1)}`;
    });
    parts.push(cmds.join(' '));
  }
  return parts.join(' ');
}

const LAYER_CLASS: Record<string, string> = { m1: 'layer-m1', m2: 'layer-m2', fuse: 'layer-fuse' };

/** Paint estimate layers and camera markers into an SVG element. Each
 * layer group carries its estimate id in data-estimate so a click can be
 * traced back to the record that produced the geometry. */
export function renderMapSvg(
  svg: SVGSVGElement,
  vp: MapViewport,
  layers: MapLayer[],
  markers: Record<string, MarkerState>,
): void {
  while (svg.firstChild) svg.removeChild(svg.firstChild);
  svg.setAttribute('viewBox', `0 0 ${vp.width} ${vp.height}`);

  for (const layer of layers) {
    const g = document.createElementNS(SVG_NS, 'g');
    g.setAttribute('class', LAYER_CLASS[layer.kind] ?? 'layer');
    g.setAttribute('data-estimate', layer.estimate);
    for (const f of layer.features) {
      const geom = f.geometry;
      if (geom.type === 'Point') {
        const [lon, lat] = geom.coordinates as number[];
        const { x, y } = toScreen(vp, lat, lon);
        const dot = document.createElementNS(SVG_NS, 'circle');
        dot.setAttribute('cx', x.toFixed(1));
        dot.setAttribute('cy', y.toFixed(1));
        dot.setAttribute('r', '4');
        dot.setAttribute('class', `estimate-point role-${String(f.properties.role ?? '')}`);
        g.appendChild(dot);
      } else {
        const rings =
          geom.type === 'LineString'
            ? [geom.coordinates as number[][]]
            : (geom.coordinates as number[][][]);
        const path = document.createElementNS(SVG_NS, 'path');
        path.setAttribute('d', pathFrom(vp, rings));
        path.setAttribute('fill-rule', 'evenodd');
        g.appendChild(path);
      }
    }
    svg.appendChild(g);
  }

  for (const m of Object.values(markers)) {
    const { x, y } = toScreen(vp, m.lat, m.lon);
    const pin = document.createElementNS(SVG_NS, 'circle');
    pin.setAttribute('cx', x.toFixed(1));
    pin.setAttribute('cy', y.toFixed(1));
    pin.setAttribute('r', '6');
    pin.setAttribute('class', m.committed ? 'camera-pin' : 'camera-pin uncommitted');
    pin.setAttribute('data-video', m.video);
    svg.appendChild(pin);
  }
}

/** Provenance list: one row per layer, labeled with its estimate id. */
export function renderLayerList(root: HTMLElement, layers: MapLayer[]): void {
  root.textContent = '';
  const ul = document.createElement('ul');
  ul.className = 'layer-list';
  for (const layer of layers) {
    const li = document.createElement('li');
    li.dataset.estimate = layer.estimate;
    li.textContent = layerLabel(layer);
    ul.appendChild(li);
  }
  root.appendChild(ul);
}

/** Grayscale spectrogram painter; quietly does nothing when the canvas has
 * no 2d context (jsdom). */
export function renderSpectrogram(canvas: HTMLCanvasElement, sg: Spectrogram, view: SpectroView): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const w = canvas.width;
  const h = canvas.height;
  const img = ctx.createImageData(w, h);
  const lo = -100;
  const hi = 0;
  for (let x = 0; x < w; x += 1) {
    const frame = Math.floor(view.originFrame + x / view.pxPerFrame);
    if (frame < 0 || frame >= sg.rows) continue;
    for (let y = 0; y < h; y += 1) {
      const bin = Math.floor(((h - 1 - y) / h) * sg.cols);
      const db = sg.values[frame * sg.cols + bin];
      const v = Math.round(255 * Math.min(1, Math.max(0, (db - lo) / (hi - lo))));
      const o = 4 * (y * w + x);
      img.data[o] = v;
      img.data[o + 1] = v;
      img.data[o + 2] = v;
      img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

/** Per-frame mean level trace under the spectrogram. */
export function renderPowerGraph(canvas: HTMLCanvasElement, sg: Spectrogram, view: SpectroView): void {
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  const power = powerGraph(sg);
  const w = canvas.width;
  const h = canvas.height;
  ctx.clearRect(0, 0, w, h);
  ctx.beginPath();
  let started = false;
  for (let k = 0; k < sg.rows; k += 1) {
    const x = xAtTime(sg, view, frameTime(sg, k));
    if (x < 0 || x > w) continue;
    const y = h * (1 - Math.min(1, Math.max(0, (power[k] + 100) / 100)));
    if (!started) {
      ctx.moveTo(x, y);
      started = true;
    } else {
      ctx.lineTo(x, y);
    }
  }
  ctx.stroke();
}

/** Timeline review: disconnected groups, per-video starts in both clocks,
 * and the offset table with audio edges separated from manual overrides. */
export function renderTimeline(root: HTMLElement, tl: TimelineResult, videos: VideoDoc[]): void {
  root.textContent = '';
  const byId = new Map(videos.map((v) => [v.id, v]));
  const groups = timelineGroups(tl);
  groups.forEach((group, gi) => {
    const box = document.createElement('div');
    box.className = 'timeline-group';
    const head = document.createElement('h3');
    head.textContent = groups.length > 1 ? `timeline group ${gi + 1}` : 'global timeline';
    box.appendChild(head);
    const ul = document.createElement('ul');
    for (const vid of group) {
      const li = document.createElement('li');
      const start = tl.starts[vid] ?? null;
      const name = byId.get(vid)?.name ?? vid;
      li.textContent = `${name}: start ${start === null ? '?' : start.toFixed(3)} s, t=0 is ${bothClocks(start, 0)}`;
      ul.appendChild(li);
    }
    box.appendChild(ul);
    root.appendChild(box);
  });

  const table = document.createElement('table');
  table.className = 'offset-table';
  const header = document.createElement('tr');
  header.innerHTML = '<th>pair</th><th>offset s</th><th>confidence</th><th>method</th>';
  table.appendChild(header);
  const ordered = [...tl.offsets].sort((a, b) => Number(b.method === 'manual') - Number(a.method === 'manual'));
  for (const o of ordered) {
    const tr = document.createElement('tr');
    tr.className = o.method === 'manual' ? 'edge-manual' : 'edge-audio';
    const low = tl.low_confidence_pairs.some((p) => p[0] === o.i && p[1] === o.j);
    tr.innerHTML =
      `<td>${o.i} ↔ ${o.j}${low ? ' (low confidence)' : ''}</td>` +
      `<td>${o.offset.toFixed(4)}</td><td>${o.confidence.toFixed(2)}</td><td>${o.method}</td>`;
    table.appendChild(tr);
  }
  root.appendChild(table);
}
