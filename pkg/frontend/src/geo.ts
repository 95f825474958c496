/** Display-only map math: web mercator projection and slippy tile URLs.
 *
 * The engine does all geodesy server-side; this file only turns served
 * lat/lon into screen pixels and back.
 */

export interface LatLon {
  lat: number;
  lon: number;
}

export const TILE_SIZE = 256;

/** Lat/lon to global pixel coordinates at the given zoom. */
export function project(p: LatLon, zoom: number): { x: number; y: number } {
  const scale = TILE_SIZE * 2 ** zoom;
  const x = ((p.lon + 180) / 360) * scale;
  const rad = (p.lat * Math.PI) / 180;
  const y = ((1 - Math.log(Math.tan(rad) + 1 / Math.cos(rad)) / Math.PI) / 2) * scale;
  return { x, y };
}

/** Inverse of project. */
export function unproject(x: number, y: number, zoom: number): LatLon {
  const scale = TILE_SIZE * 2 ** zoom;
  const lon = (x / scale) * 360 - 180;
  const n = Math.PI * (1 - (2 * y) / scale);
  const lat = (180 / Math.PI) * Math.atan(Math.sinh(n));
  return { lat, lon };
}

/** Fill a slippy tile template like https://tiles.example/{z}/{x}/{y}.png. */
export function tileUrl(template: string, z: number, x: number, y: number): string {
  return template.replace('{z}', String(z)).replace('{x}', String(x)).replace('{y}', String(y));
}

/** Bounding box of every coordinate in a GeoJSON geometry coordinate tree. */
export function coordBounds(coords: unknown): { minLat: number; maxLat: number; minLon: number; maxLon: number } {
  const b = { minLat: Infinity, maxLat: -Infinity, minLon: Infinity, maxLon: -Infinity };
  const walk = (node: unknown): void => {
    if (!Array.isArray(node)) return;
    if (node.length >= 2 && typeof node[0] === 'number' && typeof node[1] === 'number') {
      const lon = node[0];
      const lat = node[1];
      if (lat < b.minLat) b.minLat = lat;
      if (lat > b.maxLat) b.maxLat = lat;
      if (lon < b.minLon) b.minLon = lon;
      if (lon > b.maxLon) b.maxLon = lon;
      return;
    }
    for (const child of node) walk(child);
  };
  walk(coords);
  return b;
}
