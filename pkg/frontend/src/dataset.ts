import * as fs from 'node:fs';
import * as path from 'node:path';
import * as tf from '@tensorflow/tfjs';

import { DatasetManifest, labelsName, loadManifest, planesName } from './manifest.js';

/** One SNR level's samples, ready for the network. */
export interface LoadedSplit {
  manifest: DatasetManifest;
  /** sample ids as listed in the labels CSV, in file order */
  ids: number[];
  /** normalized covariance planes, shape [count, M, M, 2] */
  inputs: tf.Tensor4D;
  /** label angles in degrees, shape [count, Q], rows ascending */
  labelsDeg: tf.Tensor2D;
}

export function readPlanes(dir: string, manifest: DatasetManifest,
                           snrIdx: number): Float32Array {
  if (snrIdx < 0 || snrIdx >= manifest.snrDb.length) {
    throw new Error(`snr index ${snrIdx} out of range`);
  }
  const buf = fs.readFileSync(path.join(dir, planesName(snrIdx)));
  const expected = manifest.count * manifest.channels * manifest.mElements ** 2 * 4;
  if (buf.length !== expected) {
    throw new Error(`planes file holds ${buf.length} bytes, expected ${expected}`);
  }
  // node Buffers are little-endian views already; copy to own the memory
  return new Float32Array(buf.buffer.slice(buf.byteOffset,
                                           buf.byteOffset + buf.length));
}

export function readLabels(dir: string, manifest: DatasetManifest,
                           snrIdx: number): { ids: number[]; angles: number[][] } {
  if (snrIdx < 0 || snrIdx >= manifest.snrDb.length) {
    throw new Error(`snr index ${snrIdx} out of range`);
  }
  const text = fs.readFileSync(path.join(dir, labelsName(snrIdx)), 'utf8');
  const lines = text.split('\n').filter((l) => l.trim().length > 0);
  const expected = ['sample_id'];
  for (let i = 0; i < manifest.qSources; i++) expected.push(`angle_${i + 1}_deg`);
  if (lines[0] !== expected.join(',')) {
    throw new Error(`unexpected labels header: ${lines[0]}`);
  }
  const ids: number[] = [];
  const angles: number[][] = [];
  for (const line of lines.slice(1)) {
    const parts = line.split(',');
    if (parts.length !== manifest.qSources + 1) {
      throw new Error(`malformed labels row: ${line}`);
    }
    ids.push(Number(parts[0]));
    angles.push(parts.slice(1).map(Number));
  }
  return { ids, angles };
}

/**
 * Scale each sample by its average diagonal power (trace/M of the Re plane)
 * so the network sees an SNR-independent input scale.
 */
export function normalizePlanes(planes: Float32Array, count: number,
                                m: number): Float32Array {
  const perSample = 2 * m * m;
  const out = new Float32Array(planes.length);
  for (let s = 0; s < count; s++) {
    const base = s * perSample;
    let trace = 0;
    for (let i = 0; i < m; i++) trace += planes[base + i * m + i];
    const scale = trace / m;
    if (!(scale > 0)) {
      throw new Error(`sample ${s} has non-positive power ${scale}`);
    }
    for (let j = 0; j < perSample; j++) out[base + j] = planes[base + j] / scale;
  }
  return out;
}

export function loadSplit(dir: string, snrIdx: number): LoadedSplit {
  const manifest = loadManifest(dir);
  const m = manifest.mElements;
  const planes = normalizePlanes(readPlanes(dir, manifest, snrIdx),
                                 manifest.count, m);
  const { ids, angles } = readLabels(dir, manifest, snrIdx);
  if (ids.length !== manifest.count) {
    throw new Error(`labels list ${ids.length} rows, manifest says ${manifest.count}`);
  }
  // stored channel-major per sample; the network wants channels last
  const inputs = tf.tidy(() =>
    tf.tensor4d(planes, [manifest.count, 2, m, m]).transpose([0, 2, 3, 1])) as tf.Tensor4D;
  const labelsDeg = tf.tensor2d(angles, [manifest.count, manifest.qSources]);
  return { manifest, ids, inputs, labelsDeg };
}

/**
 * Deterministic train/held-out partition: every strideth sample starting at
 * offset is held out. A nonzero offset keeps the first and last samples in
 * the training set; labels are sorted, so those are the extreme angles and
 * holding them out would test extrapolation rather than interpolation.
 */
export function holdoutSplit(count: number, stride: number,
                             offset = 0): { train: number[]; held: number[] } {
  if (stride < 2) throw new Error('holdout stride must be >= 2');
  if (offset < 0 || offset >= stride) {
    throw new Error(`holdout offset ${offset} outside stride ${stride}`);
  }
  const train: number[] = [];
  const held: number[] = [];
  for (let i = 0; i < count; i++) {
    (i % stride === offset ? held : train).push(i);
  }
  return { train, held };
}
