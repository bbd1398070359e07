import * as tf from '@tensorflow/tfjs';

import { attachCbam } from './cbam.js';
import { SeededDropout } from './dropout.js';
import { deriveSeed } from './rng.js';
import { NetworkSpec, validateSpec } from './spec.js';

export interface BuildOptions {
  /** also expose the attention maps and the attended features as outputs */
  probe?: boolean;
}

/**
 * Conv (valid) -> batch norm -> ReLU per conv layer, attention block,
 * flatten, dense+dropout per fc layer, linear Q-output head. All weight
 * initializers are seeded so identical (spec, seed) pairs build identical
 * networks.
 *
 * With probe: true the model outputs [head, channelAttention,
 * spatialAttention, attended] instead of just the head.
 */
export function buildNetwork(spec: NetworkSpec, seed: number,
                             options: BuildOptions = {}): tf.LayersModel {
  validateSpec(spec);
  let seeds = 0;
  const nextSeed = () => deriveSeed(seed, seeds++);

  const input = tf.input({ shape: [spec.inputM, spec.inputM, spec.channels] });
  let x = input;
  for (const layer of spec.convLayers) {
    x = tf.layers.conv2d({
      filters: layer.filters,
      kernelSize: layer.kernel,
      strides: layer.stride,
      padding: 'valid',
      kernelInitializer: tf.initializers.glorotUniform({ seed: nextSeed() }),
    }).apply(x) as tf.SymbolicTensor;
    x = tf.layers.batchNormalization({}).apply(x) as tf.SymbolicTensor;
    x = tf.layers.activation({ activation: 'relu' }).apply(x) as tf.SymbolicTensor;
  }

  const lastFilters = spec.convLayers[spec.convLayers.length - 1].filters;
  const cbam = attachCbam(x, lastFilters, spec.camReduction, nextSeed());

  let y = tf.layers.flatten().apply(cbam.out) as tf.SymbolicTensor;
  for (const width of spec.fcLayers) {
    y = tf.layers.dense({
      units: width,
      activation: 'relu',
      kernelInitializer: tf.initializers.glorotUniform({ seed: nextSeed() }),
    }).apply(y) as tf.SymbolicTensor;
    y = new SeededDropout({ rate: spec.dropout, seed: nextSeed() })
      .apply(y) as tf.SymbolicTensor;
  }
  const head = tf.layers.dense({
    units: spec.outputs,
    kernelInitializer: tf.initializers.glorotUniform({ seed: nextSeed() }),
  }).apply(y) as tf.SymbolicTensor;

  const outputs = options.probe
    ? [head, cbam.channelAttention, cbam.spatialAttention, cbam.out]
    : head;
  return tf.model({ inputs: input, outputs });
}
