import { describe, expect, it } from 'vitest';

import { buildNetwork } from '../src/model.js';
import { checkAgainstManifest, convOutputDims, defaultSpec, validateSpec } from '../src/spec.js';
import type { DatasetManifest } from '../src/manifest.js';
import * as tf from '@tensorflow/tfjs';

const manifest: DatasetManifest = {
  version: 1,
  subarrayIndex: 0,
  mElements: 8,
  channels: 2,
  count: 10,
  qSources: 2,
  snrDb: [10],
  gridDeg: 1,
  angleRangeDeg: 60,
  dtype: 'f32',
  endianness: 'little',
  layout: 'sample-major, channel, row, column',
  nElements: 32,
  mOverlap: 4,
  offset: 0,
  nSnapshots: 200,
  masterSeed: 0,
};

describe('network spec validation', () => {
  it('tracks conv output dims layer by layer', () => {
    const spec = defaultSpec(32, 2);
    spec.convLayers = [{ filters: 8, kernel: 3, stride: 1 }];
    expect(convOutputDims(spec)).toEqual([30]);

    expect(convOutputDims(defaultSpec(8, 1))).toEqual([6, 4, 2]);
  });

  it('rejects a stride that leaves a fractional dim', () => {
    const spec = defaultSpec(32, 2);
    spec.convLayers = [{ filters: 8, kernel: 5, stride: 2 }];
    // (32 - 5)/2 + 1 = 14.5
    expect(() => validateSpec(spec)).toThrow(/14.5/);
  });

  it('rejects a conv stack that exhausts the spatial extent', () => {
    const spec = defaultSpec(4, 1);
    expect(() => validateSpec(spec)).toThrow(/not a positive integer/);
  });

  it('rejects an attention bottleneck of zero units', () => {
    const spec = defaultSpec(8, 1);
    spec.convLayers[spec.convLayers.length - 1].filters = 4;
    expect(() => validateSpec(spec)).toThrow(/bottleneck/);
  });

  it('rejects channel counts other than the two planes', () => {
    const spec = defaultSpec(8, 1);
    spec.channels = 3;
    expect(() => validateSpec(spec)).toThrow(/2 channels/);
  });

  it('checks the spec against a dataset manifest', () => {
    expect(() => checkAgainstManifest(defaultSpec(8, 2), manifest)).not.toThrow();
    expect(() => checkAgainstManifest(defaultSpec(16, 2), manifest)).toThrow(/8/);
    expect(() => checkAgainstManifest(defaultSpec(8, 1), manifest)).toThrow(/outputs/);
  });

  it('builds a model with a (batch, Q) head', () => {
    const model = buildNetwork(defaultSpec(8, 2), 3);
    const out = model.predict(tf.zeros([5, 8, 8, 2])) as tf.Tensor;
    expect(out.shape).toEqual([5, 2]);
    out.dispose();
  });
});
