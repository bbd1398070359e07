import * as fs from 'node:fs';
import * as tf from '@tensorflow/tfjs';

import { buildNetwork } from './model.js';
import { NetworkSpec, validateSpec } from './spec.js';

interface StoredWeight {
  name: string;
  shape: number[];
  data: string; // base64 little-endian float32
}

export interface WeightsArtifact {
  spec: NetworkSpec;
  seed: number;
  epochs: number;
  lossCurveDeg2: number[];
  rangeDeg: number;
  weights: StoredWeight[];
}

function encodeTensor(t: tf.Tensor): string {
  const data = t.dataSync() as Float32Array;
  return Buffer.from(data.buffer, data.byteOffset, data.byteLength)
    .toString('base64');
}

function decodeValues(b64: string): Float32Array {
  const buf = Buffer.from(b64, 'base64');
  // copy so the Float32Array owns aligned memory
  return new Float32Array(buf.buffer.slice(buf.byteOffset,
                                           buf.byteOffset + buf.length));
}

/**
 * Persist a trained model next to everything needed to rebuild it: the
 * architecture spec, training metadata, and every weight tensor as base64
 * float32. Weight order is the model's own; restore matches by position
 * and verifies shapes.
 */
export function saveArtifact(path: string, model: tf.LayersModel,
                             spec: NetworkSpec, seed: number, epochs: number,
                             lossCurveDeg2: number[], rangeDeg: number): void {
  const values = model.getWeights();
  const weights: StoredWeight[] = model.weights.map((w, i) => ({
    name: w.name,
    shape: [...values[i].shape],
    data: encodeTensor(values[i]),
  }));
  const artifact: WeightsArtifact = {
    spec, seed, epochs, lossCurveDeg2, rangeDeg, weights,
  };
  fs.writeFileSync(path, JSON.stringify(artifact));
}

export function loadArtifact(path: string): WeightsArtifact {
  const artifact = JSON.parse(fs.readFileSync(path, 'utf8')) as WeightsArtifact;
  if (!artifact.spec || !Array.isArray(artifact.weights)) {
    throw new Error(`${path} is not a weights artifact`);
  }
  validateSpec(artifact.spec);
  return artifact;
}

/** Rebuild the network an artifact describes and load its weights into it. */
export function restoreModel(artifact: WeightsArtifact): tf.LayersModel {
  const model = buildNetwork(artifact.spec, artifact.seed);
  const current = model.getWeights();
  if (current.length !== artifact.weights.length) {
    throw new Error(
      `artifact holds ${artifact.weights.length} weight tensors, ` +
      `rebuilt network has ${current.length}`);
  }
  const tensors = artifact.weights.map((stored, i) => {
    const shape = current[i].shape;
    if (JSON.stringify(shape) !== JSON.stringify(stored.shape)) {
      throw new Error(
        `weight ${i} (${stored.name}) has shape ${stored.shape}, ` +
        `rebuilt network expects ${shape}`);
    }
    return tf.tensor(decodeValues(stored.data), stored.shape);
  });
  model.setWeights(tensors);
  tensors.forEach((t) => t.dispose());
  return model;
}
