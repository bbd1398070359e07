import * as tf from '@tensorflow/tfjs';
import { Tensor } from '@tensorflow/tfjs';

import { deriveSeed } from './rng.js';

export interface SeededDropoutArgs {
  rate: number;
  seed: number;
  name?: string;
}

/**
 * Dropout whose mask sequence is reproducible: each training call draws a
 * mask from a seed derived from (layer seed, call counter), so two runs
 * with the same seed see identical masks in identical order. The built-in
 * layer reuses one op-level seed, which would freeze a single mask for the
 * whole run.
 */
export class SeededDropout extends tf.layers.Layer {
  private readonly rate: number;
  private readonly seed: number;
  private step = 0;

  static get className() {
    return 'SeededDropout';
  }

  constructor(args: SeededDropoutArgs) {
    super({ name: args.name });
    if (args.rate < 0 || args.rate >= 1) {
      throw new Error(`dropout rate ${args.rate} outside [0, 1)`);
    }
    this.rate = args.rate;
    this.seed = args.seed;
  }

  call(inputs: Tensor | Tensor[], kwargs: { training?: boolean }): Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    if (!kwargs?.training || this.rate === 0) {
      return x;
    }
    const stepSeed = deriveSeed(this.seed, this.step++);
    return tf.tidy(() => {
      const keep = tf.greaterEqual(
        tf.randomUniform(x.shape, 0, 1, 'float32', stepSeed),
        tf.scalar(this.rate));
      return tf.mul(x, tf.div(tf.cast(keep, 'float32'),
                              tf.scalar(1 - this.rate)));
    });
  }

  computeOutputShape(inputShape: number[]): number[] {
    return inputShape;
  }

  getConfig() {
    return { ...super.getConfig(), rate: this.rate, seed: this.seed };
  }
}

tf.serialization.registerClass(SeededDropout);
