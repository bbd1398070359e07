import * as tf from '@tensorflow/tfjs';

/**
 * Squared angle error averaged over the sources of each sample, then over
 * the batch: mean of (1/Q) sum_i (pred_i - label_i)^2. Zero exactly when
 * prediction equals label; order-sensitive, so labels are kept sorted.
 */
export function meanSquaredAngleLoss(pred: tf.Tensor, label: tf.Tensor): tf.Scalar {
  return tf.tidy(() => tf.mean(tf.square(tf.sub(pred, label)))) as tf.Scalar;
}
