import * as tf from '@tensorflow/tfjs';
import { Tensor } from '@tensorflow/tfjs';

import { deriveSeed } from './rng.js';

/**
 * Per-pixel channel statistics for spatial attention: concat of the
 * channel-wise mean and max, shape [B, H, W, F] -> [B, H, W, 2].
 */
export class ChannelStatsLayer extends tf.layers.Layer {
  static get className() {
    return 'ChannelStatsLayer';
  }

  call(inputs: Tensor | Tensor[]): Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    return tf.tidy(() => tf.concat([tf.mean(x, -1, true), tf.max(x, -1, true)], -1));
  }

  computeOutputShape(inputShape: number[]): number[] {
    return [...inputShape.slice(0, -1), 2];
  }
}

/**
 * Multiplies a feature map by an attention gate, broadcasting a [B, F]
 * channel gate up to [B, 1, 1, F]; spatial gates [B, H, W, 1] broadcast
 * as-is.
 */
export class GateLayer extends tf.layers.Layer {
  static get className() {
    return 'GateLayer';
  }

  call(inputs: Tensor | Tensor[]): Tensor {
    const [features, gate] = inputs as Tensor[];
    return tf.tidy(() => {
      const g = gate.rank === 2
        ? gate.reshape([-1, 1, 1, gate.shape[gate.shape.length - 1]])
        : gate;
      return tf.mul(features, g);
    });
  }

  computeOutputShape(inputShape: [number[], number[]]): number[] {
    return inputShape[0];
  }
}

tf.serialization.registerClass(ChannelStatsLayer);
tf.serialization.registerClass(GateLayer);

export interface CbamOutputs {
  out: tf.SymbolicTensor;
  /** channel attention, [B, F], entries in (0, 1) */
  channelAttention: tf.SymbolicTensor;
  /** spatial attention, [B, H, W, 1], entries in (0, 1) */
  spatialAttention: tf.SymbolicTensor;
}

/**
 * Channel attention then spatial attention, each applied multiplicatively.
 *
 * Channel: a shared two-layer perceptron scores the average-pooled and
 * max-pooled channel descriptors; the sigmoid of their sum gates every
 * channel. Spatial: a 7x7 convolution (same padding, so small maps stay
 * valid) over the stacked channel mean/max maps gates every pixel.
 */
export function attachCbam(features: tf.SymbolicTensor, filters: number,
                           reduction: number, seed: number): CbamOutputs {
  const bottleneck = Math.floor(filters / reduction);
  if (bottleneck < 1) {
    throw new Error(
      `channel attention bottleneck ${filters}/${reduction} collapses to zero units`);
  }

  const avg = tf.layers.globalAveragePooling2d({}).apply(features) as tf.SymbolicTensor;
  const max = tf.layers.globalMaxPooling2d({}).apply(features) as tf.SymbolicTensor;
  const squeeze = tf.layers.dense({
    units: bottleneck,
    activation: 'relu',
    kernelInitializer: tf.initializers.glorotUniform({ seed: deriveSeed(seed, 1) }),
  });
  const expand = tf.layers.dense({
    units: filters,
    kernelInitializer: tf.initializers.glorotUniform({ seed: deriveSeed(seed, 2) }),
  });
  const scores = tf.layers.add().apply([
    expand.apply(squeeze.apply(avg)) as tf.SymbolicTensor,
    expand.apply(squeeze.apply(max)) as tf.SymbolicTensor,
  ]) as tf.SymbolicTensor;
  const channelAttention = tf.layers.activation({ activation: 'sigmoid' })
    .apply(scores) as tf.SymbolicTensor;
  const gated = new GateLayer({})
    .apply([features, channelAttention]) as tf.SymbolicTensor;

  const stats = new ChannelStatsLayer({}).apply(gated) as tf.SymbolicTensor;
  const spatialAttention = tf.layers.conv2d({
    filters: 1,
    kernelSize: 7,
    padding: 'same',
    activation: 'sigmoid',
    kernelInitializer: tf.initializers.glorotUniform({ seed: deriveSeed(seed, 3) }),
  }).apply(stats) as tf.SymbolicTensor;
  const out = new GateLayer({})
    .apply([gated, spatialAttention]) as tf.SymbolicTensor;
  return { out, channelAttention, spatialAttention };
}
