import * as fs from 'node:fs';
import * as tf from '@tensorflow/tfjs';

/**
 * Run the network on a batch and return angles in degrees, each row sorted
 * ascending to match the label convention.
 */
export function predictAngles(model: tf.LayersModel, inputs: tf.Tensor4D,
                              rangeDeg: number): number[][] {
  const out = tf.tidy(() =>
    (model.predict(inputs) as tf.Tensor).mul(tf.scalar(rangeDeg)));
  const [rows, q] = out.shape as [number, number];
  const flat = out.dataSync();
  out.dispose();
  const result: number[][] = [];
  for (let r = 0; r < rows; r++) {
    const row = Array.from(flat.slice(r * q, (r + 1) * q));
    row.sort((a, b) => a - b);
    result.push(row);
  }
  return result;
}

/** Write the predictions CSV: header sample_id,angle_1_deg,...,angle_Q_deg. */
export function writePredictionsCsv(path: string, sampleIds: number[],
                                    anglesDeg: number[][]): void {
  if (sampleIds.length !== anglesDeg.length) {
    throw new Error(
      `${sampleIds.length} sample ids but ${anglesDeg.length} prediction rows`);
  }
  const q = anglesDeg[0]?.length ?? 0;
  if (q < 1) {
    throw new Error('no angles to write');
  }
  const header = ['sample_id'];
  for (let i = 0; i < q; i++) header.push(`angle_${i + 1}_deg`);
  const lines = [header.join(',')];
  for (let r = 0; r < sampleIds.length; r++) {
    if (anglesDeg[r].length !== q) {
      throw new Error(`prediction row ${r} has ${anglesDeg[r].length} angles, expected ${q}`);
    }
    lines.push([sampleIds[r], ...anglesDeg[r].map((a) => a.toPrecision(10))].join(','));
  }
  fs.writeFileSync(path, lines.join('\n') + '\n');
}
