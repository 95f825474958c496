import { describe, expect, it } from 'vitest';

import { coordBounds, project, tileUrl, unproject } from '../src/geo.js';

describe('map math', () => {
  it('project and unproject round-trip across zoom levels', () => {
    const points = [
      { lat: 36.09, lon: -115.17 },
      { lat: -33.86, lon: 151.21 },
      { lat: 0.0, lon: 0.0 },
      { lat: 59.93, lon: 10.75 },
    ];
    for (const p of points) {
      for (const zoom of [2, 10, 16]) {
        const { x, y } = project(p, zoom);
        const back = unproject(x, y, zoom);
        expect(back.lat).toBeCloseTo(p.lat, 9);
        expect(back.lon).toBeCloseTo(p.lon, 9);
      }
    }
  });

  it('doubling the zoom doubles pixel coordinates', () => {
    const p = { lat: 36.09, lon: -115.17 };
    const a = project(p, 10);
    const b = project(p, 11);
    expect(b.x / a.x).toBeCloseTo(2, 12);
    expect(b.y / a.y).toBeCloseTo(2, 12);
  });

  it('fills slippy tile templates', () => {
    expect(tileUrl('https://tiles.example/{z}/{x}/{y}.png', 14, 3021, 6432)).toBe(
      'https://tiles.example/14/3021/6432.png',
    );
  });

  it('walks nested GeoJSON coordinate trees for bounds', () => {
    const poly = [
      [
        [-115.2, 36.0],
        [-115.1, 36.0],
        [-115.1, 36.1],
        [-115.2, 36.1],
        [-115.2, 36.0],
      ],
    ];
    const b = coordBounds(poly);
    expect(b).toEqual({ minLat: 36.0, maxLat: 36.1, minLon: -115.2, maxLon: -115.1 });
    const point = coordBounds([-115.17, 36.09]);
    expect(point.minLat).toBe(36.09);
    expect(point.maxLon).toBe(-115.17);
  });
});
