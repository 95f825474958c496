/** Group served GeoJSON features into provenance-keyed map layers.
 *
 * Every feature that is not a camera pin must carry the id of the estimate
 * record it was derived from. A feature that cannot be traced is a contract
 * violation and is rejected loudly rather than drawn anonymously.
 */

import type { Feature, FeatureCollection, MapLayer } from './types.js';

export interface GroupedLayers {
  cameras: Feature[];
  layers: MapLayer[];
}

export function buildLayers(fc: FeatureCollection): GroupedLayers {
  const cameras: Feature[] = [];
  const byEstimate = new Map<string, MapLayer>();
  for (const f of fc.features) {
    const props = f.properties ?? {};
    if (props.kind === 'camera') {
      cameras.push(f);
      continue;
    }
    const estimate = props.estimate;
    if (typeof estimate !== 'string' || estimate === '') {
      throw new Error(`feature of kind ${String(props.kind)} carries no estimate id`);
    }
    let layer = byEstimate.get(estimate);
    if (!layer) {
      layer = { estimate, kind: String(props.kind), features: [] };
      byEstimate.set(estimate, layer);
    }
    layer.features.push(f);
  }
  return { cameras, layers: [...byEstimate.values()] };
}

/** Human label for a layer list entry, e.g. "e0003 m2 (4 features)". */
export function layerLabel(layer: MapLayer): string {
  return `${layer.estimate} ${layer.kind} (${layer.features.length} features)`;
}
