// @vitest-environment jsdom
import { describe, expect, it } from 'vitest';

import { fitViewport, fromScreen, renderLayerList, renderMapSvg, renderTimeline, toScreen } from '../src/render.js';
import type { TimelineResult } from '../src/sync.js';
import type { Feature, MapLayer, MarkerState, VideoDoc } from '../src/types.js';

function feature(props: Record<string, unknown>, type: string, coordinates: unknown): Feature {
  return { type: 'Feature', geometry: { type, coordinates }, properties: props };
}

const LAYERS: MapLayer[] = [
  {
    estimate: 'e0002',
    kind: 'm1',
    features: [
      feature({ estimate: 'e0002', kind: 'm1' }, 'Polygon', [
        [
          [-115.18, 36.08],
          [-115.16, 36.08],
          [-115.16, 36.1],
          [-115.18, 36.1],
          [-115.18, 36.08],
        ],
      ]),
    ],
  },
  {
    estimate: 'e0003',
    kind: 'm2',
    features: [
      feature({ estimate: 'e0003', kind: 'm2', role: 'center' }, 'LineString', [
        [-115.18, 36.085],
        [-115.16, 36.095],
      ]),
    ],
  },
];

describe('map rendering', () => {
  it('screen projection round-trips inside the fitted viewport', () => {
    const vp = fitViewport(
      LAYERS.flatMap((l) => l.features),
      800,
      600,
    );
    const { x, y } = toScreen(vp, 36.09, -115.17);
    const back = fromScreen(vp, x, y);
    expect(back.lat).toBeCloseTo(36.09, 6);
    expect(back.lon).toBeCloseTo(-115.17, 6);
    expect(x).toBeGreaterThan(0);
    expect(x).toBeLessThan(800);
  });

  it('draws uncommitted markers visually distinct from persisted fixes', () => {
    const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg') as SVGSVGElement;
    const vp = fitViewport(
      LAYERS.flatMap((l) => l.features),
      800,
      600,
    );
    const markers: Record<string, MarkerState> = {
      v1: { video: 'v1', lat: 36.09, lon: -115.17, committed: true },
      v2: { video: 'v2', lat: 36.085, lon: -115.175, committed: false },
    };
    renderMapSvg(svg, vp, LAYERS, markers);

    const pins = [...svg.querySelectorAll('circle[data-video]')];
    expect(pins).toHaveLength(2);
    const byVideo = new Map(pins.map((p) => [p.getAttribute('data-video'), p.getAttribute('class')]));
    expect(byVideo.get('v1')).toBe('camera-pin');
    expect(byVideo.get('v2')).toBe('camera-pin uncommitted');
  });

  it('tags every layer group with its estimate id', () => {
    const svg = document.createElementNS('http://www.w3.org/2000/svg', 'svg') as SVGSVGElement;
    const vp = fitViewport(
      LAYERS.flatMap((l) => l.features),
      800,
      600,
    );
    renderMapSvg(svg, vp, LAYERS, {});
    const groups = [...svg.querySelectorAll('g[data-estimate]')];
    expect(groups.map((g) => g.getAttribute('data-estimate'))).toEqual(['e0002', 'e0003']);

    const list = document.createElement('div');
    renderLayerList(list, LAYERS);
    const items = [...list.querySelectorAll('li')];
    expect(items.map((li) => li.dataset.estimate)).toEqual(['e0002', 'e0003']);
    expect(items[0].textContent).toContain('e0002 m1');
  });
});

describe('timeline rendering', () => {
  const tl: TimelineResult = {
    starts: { v1: 0.0, v2: 1.5, v9: 0.0 },
    anchor: 'v1',
    max_residual: 0.001,
    components: [['v1', 'v2'], ['v9']],
    low_confidence_pairs: [],
    offsets: [
      { i: 'v1', j: 'v2', offset: 1.5, confidence: 0.9, method: 'audio' },
      { i: 'v1', j: 'v9', offset: 0.25, confidence: 1.0, method: 'manual' },
    ],
  };
  const videos: VideoDoc[] = [
    { id: 'v1', name: 'north cam', fps: 30, duration: 10, start: 0, position: null, markings: [] },
    { id: 'v2', name: 'south cam', fps: 30, duration: 10, start: 1.5, position: null, markings: [] },
    { id: 'v9', name: 'lone cam', fps: 30, duration: 10, start: 0, position: null, markings: [] },
  ];

  it('renders disconnected groups separately with both clocks labeled', () => {
    const root = document.createElement('div');
    renderTimeline(root, tl, videos);
    const groups = [...root.querySelectorAll('.timeline-group')];
    expect(groups).toHaveLength(2);
    expect(groups[0].textContent).toContain('north cam');
    expect(groups[1].textContent).toContain('lone cam');
    expect(groups[0].textContent).toContain('clip 0.000 s / global 1.500 s');
  });

  it('separates manual overrides from audio edges in the offset table', () => {
    const root = document.createElement('div');
    renderTimeline(root, tl, videos);
    const manual = [...root.querySelectorAll('tr.edge-manual')];
    const audio = [...root.querySelectorAll('tr.edge-audio')];
    expect(manual).toHaveLength(1);
    expect(audio).toHaveLength(1);
    expect(manual[0].textContent).toContain('manual');
  });
});
