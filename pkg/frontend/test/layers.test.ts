import { describe, expect, it } from 'vitest';

import { buildLayers, layerLabel } from '../src/layers.js';
import type { Feature, FeatureCollection } from '../src/types.js';

function feature(props: Record<string, unknown>, type = 'Point', coordinates: unknown = [0, 0]): Feature {
  return { type: 'Feature', geometry: { type, coordinates }, properties: props };
}

const SERVED: FeatureCollection = {
  type: 'FeatureCollection',
  features: [
    feature({ kind: 'camera', video: 'c0001-v01', name: 'cam-a' }),
    feature({ kind: 'camera', video: 'c0001-v02', name: 'cam-b' }),
    feature({ estimate: 'e0002', kind: 'm1', video: 'c0001-v01', dh_mean: 412.0 }, 'Polygon', [[[0, 0]]]),
    feature({ estimate: 'e0003', kind: 'm2', role: 'lower', pair: ['c0001-v01', 'c0001-v02'] }, 'LineString', [[0, 0]]),
    feature({ estimate: 'e0003', kind: 'm2', role: 'center', pair: ['c0001-v01', 'c0001-v02'] }, 'LineString', [[0, 0]]),
    feature({ estimate: 'e0003', kind: 'm2', role: 'upper', pair: ['c0001-v01', 'c0001-v02'] }, 'LineString', [[0, 0]]),
    feature({ estimate: 'e0004', kind: 'fuse', role: 'argmax' }, 'Polygon', [[[0, 0]]]),
    feature({ estimate: 'e0004', kind: 'fuse', role: 'centroid' }),
  ],
};

describe('layer provenance', () => {
  it('every rendered layer carries the estimate record id it came from', () => {
    const { cameras, layers } = buildLayers(SERVED);
    expect(cameras).toHaveLength(2);
    expect(layers.map((l) => l.estimate)).toEqual(['e0002', 'e0003', 'e0004']);
    for (const layer of layers) {
      expect(layer.estimate).toMatch(/^e\d{4}$/);
      for (const f of layer.features) expect(f.properties.estimate).toBe(layer.estimate);
    }
  });

  it('groups band lines of one record into one layer', () => {
    const { layers } = buildLayers(SERVED);
    const m2 = layers.find((l) => l.kind === 'm2');
    expect(m2?.features.map((f) => f.properties.role)).toEqual(['lower', 'center', 'upper']);
  });

  it('rejects an untraceable estimate feature instead of drawing it anonymously', () => {
    const bad: FeatureCollection = {
      type: 'FeatureCollection',
      features: [feature({ kind: 'm1', video: 'v01' })],
    };
    expect(() => buildLayers(bad)).toThrow(/no estimate id/);
  });

  it('labels a layer with id, kind and feature count', () => {
    const { layers } = buildLayers(SERVED);
    expect(layerLabel(layers[1])).toBe('e0003 m2 (3 features)');
  });
});
