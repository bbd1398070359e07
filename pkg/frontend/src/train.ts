import * as tf from '@tensorflow/tfjs';

import { meanSquaredAngleLoss } from './loss.js';
import { mulberry32, deriveSeed, shuffledIndices } from './rng.js';
import { NetworkSpec } from './spec.js';
import { buildNetwork } from './model.js';

export interface TrainOptions {
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
}

export interface TrainRun {
  spec: NetworkSpec;
  options: TrainOptions;
  /** per-epoch mean training loss in squared degrees; length = epochs */
  lossCurveDeg2: number[];
  model: tf.LayersModel;
}

/**
 * Deterministic minibatch training of a fresh network on the given samples.
 *
 * labels arrive in degrees and are scaled to [-1, 1] by rangeDeg before
 * optimization; the recorded loss curve is scaled back to squared degrees
 * so the numbers stay interpretable. Loss must stay finite: a NaN or Inf
 * aborts with the epoch and step in the message.
 */
export function trainNetwork(spec: NetworkSpec, inputs: tf.Tensor4D,
                             labelsDeg: tf.Tensor2D, rangeDeg: number,
                             options: TrainOptions): TrainRun {
  if (options.epochs < 1) {
    throw new Error('epochs must be >= 1');
  }
  const n = inputs.shape[0];
  if (labelsDeg.shape[0] !== n) {
    throw new Error(`${n} inputs but ${labelsDeg.shape[0]} label rows`);
  }
  const batch = Math.min(options.batchSize, n);
  const model = buildNetwork(spec, options.seed);
  // LayerVariable carries the live Variable in val; the typings mark it
  // protected, so minimize() gets it through a cast
  const trainable = model.trainableWeights.map(
    (w) => (w as unknown as { val: tf.Variable }).val);
  const optimizer = tf.train.adam(options.learningRate);
  const labels = tf.tidy(() => labelsDeg.div(tf.scalar(rangeDeg))) as tf.Tensor2D;

  const lossCurveDeg2: number[] = [];
  try {
    for (let epoch = 0; epoch < options.epochs; epoch++) {
      const order = shuffledIndices(n, mulberry32(deriveSeed(options.seed, epoch)));
      let epochLoss = 0;
      let steps = 0;
      for (let start = 0; start < n; start += batch) {
        const idx = order.slice(start, start + batch);
        const stepLoss = tf.tidy(() => {
          const xb = tf.gather(inputs, idx);
          const yb = tf.gather(labels, idx);
          const cost = optimizer.minimize(
            () => meanSquaredAngleLoss(
              model.apply(xb, { training: true }) as tf.Tensor, yb),
            true, trainable) as tf.Scalar;
          return cost.dataSync()[0];
        });
        if (!Number.isFinite(stepLoss)) {
          throw new Error(
            `training loss became ${stepLoss} at epoch ${epoch + 1}, ` +
            `step ${steps + 1}; check learning rate and input scaling`);
        }
        epochLoss += stepLoss;
        steps++;
      }
      lossCurveDeg2.push((epochLoss / steps) * rangeDeg * rangeDeg);
    }
  } finally {
    labels.dispose();
    optimizer.dispose();
  }
  return { spec, options, lossCurveDeg2, model };
}
