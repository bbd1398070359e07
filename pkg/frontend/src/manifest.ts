import * as fs from 'node:fs';
import * as path from 'node:path';

/** Parsed manifest.txt; field names follow the file's key-value lines. */
export interface DatasetManifest {
  version: number;
  subarrayIndex: number;
  mElements: number;
  channels: number;
  count: number;
  qSources: number;
  snrDb: number[];
  gridDeg: number;
  angleRangeDeg: number;
  dtype: string;
  endianness: string;
  layout: string;
  nElements: number;
  mOverlap: number;
  offset: number;
  nSnapshots: number;
  masterSeed: number;
}

export const MANIFEST_NAME = 'manifest.txt';

function field(raw: Map<string, string>, key: string): string {
  const value = raw.get(key);
  if (value === undefined) {
    throw new Error(`manifest missing field '${key}'`);
  }
  return value;
}

export function parseManifest(text: string): DatasetManifest {
  const raw = new Map<string, string>();
  for (const line of text.split('\n')) {
    const trimmed = line.trim();
    if (!trimmed || trimmed.startsWith('#')) continue;
    const sep = trimmed.indexOf(':');
    if (sep < 0) {
      throw new Error(`malformed manifest line: ${trimmed}`);
    }
    raw.set(trimmed.slice(0, sep).trim(), trimmed.slice(sep + 1).trim());
  }
  const manifest: DatasetManifest = {
    version: Number(field(raw, 'version')),
    subarrayIndex: Number(field(raw, 'subarray_index')),
    mElements: Number(field(raw, 'm_elements')),
    channels: Number(field(raw, 'channels')),
    count: Number(field(raw, 'count')),
    qSources: Number(field(raw, 'q_sources')),
    snrDb: field(raw, 'snr_db').split(',').map(Number),
    gridDeg: Number(field(raw, 'grid_deg')),
    angleRangeDeg: Number(field(raw, 'angle_range_deg')),
    dtype: field(raw, 'dtype'),
    endianness: field(raw, 'endianness'),
    layout: field(raw, 'layout'),
    nElements: Number(field(raw, 'n_elements')),
    mOverlap: Number(field(raw, 'm_overlap')),
    offset: Number(field(raw, 'offset')),
    nSnapshots: Number(field(raw, 'n_snapshots')),
    masterSeed: Number(field(raw, 'master_seed')),
  };
  if (manifest.dtype !== 'f32' || manifest.endianness !== 'little') {
    throw new Error('dataset format is little-endian float32 only');
  }
  if (manifest.channels !== 2) {
    throw new Error('dataset format defines exactly 2 channels (Re, Im)');
  }
  return manifest;
}

export function loadManifest(dir: string): DatasetManifest {
  return parseManifest(fs.readFileSync(path.join(dir, MANIFEST_NAME), 'utf8'));
}

export function planesName(snrIdx: number): string {
  return `planes_${String(snrIdx).padStart(3, '0')}.f32`;
}

export function labelsName(snrIdx: number): string {
  return `labels_${String(snrIdx).padStart(3, '0')}.csv`;
}
