/** Application shell: login, collection picker, and the three panes.
 *
 * This file is wiring only. Every estimate, band, and heatmap is computed
 * by the service; the client fetches documents and artifacts over HTTP and
 * renders them. The bearer token is typed at the login screen and kept in
 * memory for the life of the page.
 */

import * as api from './api.js';
import { pollJob } from './jobs.js';
import { MapController, type MapDeps } from './map.js';
import { MarkingController, type MarkingDeps } from './marking.js';
import {
  fitViewport,
  fromScreen,
  renderLayerList,
  renderMapSvg,
  renderPowerGraph,
  renderSpectrogram,
  renderTimeline,
  type MapViewport,
} from './render.js';
import { SyncController, type SyncDeps, uncertaintyBadge } from './sync.js';
import type { CollectionDoc, DetectCandidate, JobSnapshot } from './types.js';

const DEFAULT_TILES = 'https://tile.openstreetmap.org/{z}/{x}/{y}.png';

function el<K extends keyof HTMLElementTagNameMap>(tag: K, cls?: string, text?: string): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function mapDeps(cid: string): MapDeps {
  return {
    fetchDoc: () => api.get<CollectionDoc>(`/collections/${cid}`),
    fetchGeojson: (gunshot) => api.get(`/collections/${cid}/estimates/${gunshot}/geojson`),
    putFix: (video, lat, lon, version) => api.put(`/videos/${video}/camera-fix`, { lat, lon, elev: 0.0, version }),
    submitEstimate: (video) => api.post<JobSnapshot>(`/collections/${cid}/jobs/estimate_m1`, { video }),
    waitJob: (id) => pollJob(id),
  };
}

export function markingDeps(cid: string, doc: () => CollectionDoc): MarkingDeps {
  return {
    fetchSpectrogram: (video) => api.getText(`/videos/${video}/spectrogram`),
    putMarkings: (video, payload) => api.put(`/videos/${video}/markings`, payload),
    detect: async (video) => {
      const job = await api.post<JobSnapshot>(`/collections/${cid}/jobs/detect`, { video });
      const done = await pollJob(job.id);
      return (done.result?.candidates as DetectCandidate[]) ?? [];
    },
    docVersion: () => doc().version,
    persistedMarks: (video) => doc().videos.find((v) => v.id === video)?.markings ?? [],
  };
}

export function syncDeps(cid: string): SyncDeps {
  return {
    submitSync: (manual) => api.post<JobSnapshot>(`/collections/${cid}/jobs/sync`, { manual }),
    waitJob: (id) => pollJob(id),
    fetchTimeline: () => api.get(`/collections/${cid}/timeline`),
  };
}

function loginScreen(root: HTMLElement, onReady: () => void): void {
  root.textContent = '';
  const box = el('div', 'login');
  box.appendChild(el('h1', '', 'shotloc'));
  const baseInput = el('input');
  baseInput.value = '';
  baseInput.placeholder = 'service URL (blank for same origin)';
  const tokenInput = el('input');
  tokenInput.type = 'password';
  tokenInput.placeholder = 'bearer token';
  const button = el('button', '', 'open');
  button.addEventListener('click', () => {
    api.configure(baseInput.value, tokenInput.value);
    onReady();
  });
  box.append(baseInput, tokenInput, button);
  root.appendChild(box);
}

async function collectionScreen(root: HTMLElement, onPick: (cid: string) => void): Promise<void> {
  root.textContent = '';
  const list = await api.get<{ id: string; name: string }[]>('/collections');
  const box = el('div', 'collections');
  box.appendChild(el('h2', '', 'collections'));
  for (const c of list) {
    const row = el('button', 'collection-row', `${c.id}  ${c.name}`);
    row.addEventListener('click', () => onPick(c.id));
    box.appendChild(row);
  }
  root.appendChild(box);
}

function mapPane(root: HTMLElement, cid: string, tileTemplate: string): void {
  void tileTemplate; // tile painting is optional; geometry renders without it
  const controller = new MapController(mapDeps(cid));
  const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg');
  svg.setAttribute('class', 'map-canvas');
  const status = el('div', 'map-status');
  const layerBox = el('div', 'layer-box');
  root.append(svg, status, layerBox);

  let vp: MapViewport | null = null;
  const repaint = (): void => {
    const all = controller.state.layers.flatMap((l) => l.features).concat(controller.cameras);
    vp = fitViewport(all, 800, 600);
    renderMapSvg(svg, vp, controller.state.layers, controller.state.markers);
    renderLayerList(layerBox, controller.state.layers);
    status.textContent = [
      controller.lastError && `error: ${controller.lastError}`,
      controller.warning && `warning: ${controller.warning}`,
      controller.state.pendingJobs.length > 0 && `jobs pending: ${controller.state.pendingJobs.join(', ')}`,
    ]
      .filter(Boolean)
      .join(' | ');
  };

  let dragging: string | null = null;
  svg.addEventListener('pointerdown', (ev) => {
    const target = ev.target as Element;
    const video = target.getAttribute('data-video');
    if (video) dragging = video;
  });
  svg.addEventListener('pointermove', (ev) => {
    if (!dragging || !vp) return;
    const rect = svg.getBoundingClientRect();
    const { lat, lon } = fromScreen(vp, ev.clientX - rect.left, ev.clientY - rect.top);
    controller.dragTo(dragging, lat, lon);
    repaint();
  });
  svg.addEventListener('pointerup', () => {
    if (!dragging) return;
    const video = dragging;
    dragging = null;
    void controller.drop(video).then(repaint);
  });

  void controller.load().then(repaint);
}

function markingPane(root: HTMLElement, cid: string, doc: () => CollectionDoc, video: string): void {
  const controller = new MarkingController(markingDeps(cid, doc), video);
  const spect = el('canvas', 'spectrogram');
  spect.width = 800;
  spect.height = 256;
  const power = el('canvas', 'power-graph');
  power.width = 800;
  power.height = 80;
  const tools = el('div', 'mark-tools');
  const status = el('div', 'mark-status');
  const suggestBtn = el('button', '', 'suggest transients');
  const saveBtn = el('button', '', 'save marks');
  tools.append(suggestBtn, saveBtn);
  root.append(spect, power, tools, status);

  let tool: 'shock' | 'muzzle' = 'shock';
  const repaint = (): void => {
    if (controller.sg) {
      renderSpectrogram(spect, controller.sg, controller.view);
      renderPowerGraph(power, controller.sg, controller.view);
    }
    const s = controller.state;
    status.textContent =
      `tool: ${tool} | shock: ${s.shock === null ? 'unset' : s.shock.toFixed(4) + ' s'}` +
      ` | muzzle: ${s.muzzle === null ? 'unset' : s.muzzle.toFixed(4) + ' s'}` +
      (s.error ? ` | ${s.error}` : '');
  };

  spect.addEventListener('click', (ev) => {
    const rect = spect.getBoundingClientRect();
    controller.clickAt(tool, ev.clientX - rect.left);
    tool = tool === 'shock' ? 'muzzle' : 'shock';
    repaint();
  });
  spect.addEventListener('wheel', (ev) => {
    ev.preventDefault();
    const rect = spect.getBoundingClientRect();
    controller.zoom(ev.deltaY < 0 ? 1.25 : 0.8, ev.clientX - rect.left);
    repaint();
  });
  suggestBtn.addEventListener('click', () => {
    void controller.suggest().then(() => {
      const items = controller.suggestions
        .map((c, i) => `#${i} ${c.t.toFixed(4)} s (${c.score_db.toFixed(1)} dB)`)
        .join(', ');
      status.textContent = `suggestions: ${items || 'none'}`;
    });
  });
  saveBtn.addEventListener('click', () => {
    void controller.save().then(repaint);
  });

  void controller.load().then(repaint);
}

function syncPane(root: HTMLElement, cid: string, doc: () => CollectionDoc): void {
  const controller = new SyncController(syncDeps(cid));
  const stepper = el('div', 'stepper');
  const badge = el('span', 'uncertainty-badge');
  const timelineBox = el('div', 'timeline-box');
  const status = el('div', 'sync-status');
  root.append(stepper, badge, timelineBox, status);

  const videos = doc().videos;
  if (videos.length >= 2) {
    const pair = controller.addPair(videos[0].id, videos[1].id, videos[0].fps, videos[1].fps);
    badge.textContent = uncertaintyBadge(pair);
    for (const [which, label] of [
      ['i', videos[0].name],
      ['j', videos[1].name],
    ] as const) {
      for (const delta of [-1, 1]) {
        const b = el('button', '', `${label} ${delta > 0 ? '+' : '-'}1 frame`);
        b.addEventListener('click', () => {
          controller.step(pair, which, delta);
          badge.textContent = uncertaintyBadge(pair);
        });
        stepper.appendChild(b);
      }
    }
  }
  const applyBtn = el('button', '', 'apply manual sync');
  applyBtn.addEventListener('click', () => {
    void controller.apply().then(() => {
      status.textContent = controller.status;
      if (controller.timeline) renderTimeline(timelineBox, controller.timeline, doc().videos);
    });
  });
  stepper.appendChild(applyBtn);
}

export async function openCollection(root: HTMLElement, cid: string, tileTemplate = DEFAULT_TILES): Promise<void> {
  root.textContent = '';
  let doc = await api.get<CollectionDoc>(`/collections/${cid}`);
  const docRef = (): CollectionDoc => doc;
  const refreshDoc = async (): Promise<void> => {
    doc = await api.get<CollectionDoc>(`/collections/${cid}`);
  };

  const nav = el('div', 'tabs');
  const panes = el('div', 'panes');
  root.append(nav, panes);
  const tabs: Record<string, () => void> = {
    map: () => {
      panes.textContent = '';
      mapPane(panes, cid, tileTemplate);
    },
    marking: () => {
      panes.textContent = '';
      void refreshDoc().then(() => {
        if (doc.videos.length > 0) markingPane(panes, cid, docRef, doc.videos[0].id);
      });
    },
    sync: () => {
      panes.textContent = '';
      void refreshDoc().then(() => syncPane(panes, cid, docRef));
    },
  };
  for (const name of Object.keys(tabs)) {
    const b = el('button', 'tab', name);
    b.addEventListener('click', tabs[name]);
    nav.appendChild(b);
  }
  tabs.map();
}

export function main(root: HTMLElement): void {
  loginScreen(root, () => {
    void collectionScreen(root, (cid) => {
      void openCollection(root, cid);
    });
  });
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  main(document.getElementById('app') as HTMLElement);
}
