#!/usr/bin/env node
import * as tf from '@tensorflow/tfjs';
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';

import { loadSplit, LoadedSplit } from './dataset.js';
import { loadArtifact, restoreModel, saveArtifact } from './io.js';
import { loadManifest } from './manifest.js';
import { predictAngles, writePredictionsCsv } from './predict.js';
import { checkAgainstManifest, defaultSpec, loadSpecFile, NetworkSpec } from './spec.js';
import { trainNetwork } from './train.js';

interface TrainArgs {
  data: string[];
  spec?: string;
  epochs: number;
  seed: number;
  batch: number;
  lr: number;
  snrIndex?: number;
  out: string;
}

interface PredictArgs {
  weights: string;
  data: string;
  out: string;
  snrIndex: number;
  ids?: string;
}

function gatherSplits(dirs: string[], snrIndex: number | undefined,
                      spec: NetworkSpec): LoadedSplit[] {
  const splits: LoadedSplit[] = [];
  for (const dir of dirs) {
    const manifest = loadManifest(dir);
    checkAgainstManifest(spec, manifest);
    const indices = snrIndex === undefined
      ? manifest.snrDb.map((_, i) => i)
      : [snrIndex];
    for (const idx of indices) {
      splits.push(loadSplit(dir, idx));
    }
  }
  return splits;
}

function runTrain(args: TrainArgs): void {
  const first = loadManifest(args.data[0]);
  const spec = args.spec
    ? loadSpecFile(args.spec, first.mElements, first.qSources)
    : defaultSpec(first.mElements, first.qSources);
  // multiple --data dirs share one set of weights across subarrays
  const splits = gatherSplits(args.data, args.snrIndex, spec);
  const range = first.angleRangeDeg;
  if (splits.some((s) => s.manifest.angleRangeDeg !== range)) {
    throw new Error('datasets disagree on angle range');
  }
  const inputs = tf.concat(splits.map((s) => s.inputs)) as tf.Tensor4D;
  const labels = tf.concat(splits.map((s) => s.labelsDeg)) as tf.Tensor2D;
  splits.forEach((s) => { s.inputs.dispose(); s.labelsDeg.dispose(); });

  const run = trainNetwork(spec, inputs, labels, range, {
    epochs: args.epochs,
    batchSize: args.batch,
    learningRate: args.lr,
    seed: args.seed,
  });
  run.lossCurveDeg2.forEach((loss, epoch) => {
    process.stderr.write(`epoch ${epoch + 1}/${args.epochs} loss ${loss.toFixed(4)} deg^2\n`);
  });
  saveArtifact(args.out, run.model, spec, args.seed, args.epochs,
               run.lossCurveDeg2, range);
  process.stdout.write(`${args.out}\n`);
}

function runPredict(args: PredictArgs): void {
  const artifact = loadArtifact(args.weights);
  const model = restoreModel(artifact);
  const split = loadSplit(args.data, args.snrIndex);
  checkAgainstManifest(artifact.spec, split.manifest);

  let ids = split.ids;
  let inputs = split.inputs;
  if (args.ids) {
    const wanted = args.ids.split(',').map(Number);
    const positions = wanted.map((id) => {
      const pos = split.ids.indexOf(id);
      if (pos < 0) throw new Error(`sample id ${id} not in the dataset`);
      return pos;
    });
    inputs = tf.gather(split.inputs, positions) as tf.Tensor4D;
    ids = wanted;
  }
  const angles = predictAngles(model, inputs, artifact.rangeDeg);
  writePredictionsCsv(args.out, ids, angles);
  process.stdout.write(`${args.out}\n`);
}

export async function main(argv: string[]): Promise<void> {
  await yargs(argv)
    .scriptName('cbam-cnn')
    .command<TrainArgs>(
      'train', 'train one angle-regression network on exported datasets',
      (y) => y
        .option('data', { type: 'string', array: true, demandOption: true,
                          describe: 'dataset directory (repeat to share weights across subarrays)' })
        .option('spec', { type: 'string',
                          describe: 'network spec JSON; defaults to the built-in stack' })
        .option('epochs', { type: 'number', default: 50 })
        .option('seed', { type: 'number', default: 0 })
        .option('batch', { type: 'number', default: 8 })
        .option('lr', { type: 'number', default: 1e-3 })
        .option('snr-index', { type: 'number',
                               describe: 'train on one SNR level instead of all jointly' })
        .option('out', { type: 'string', default: 'weights.json' }),
      (args) => runTrain(args))
    .command<PredictArgs>(
      'predict', 'write a predictions CSV for an exported dataset',
      (y) => y
        .option('weights', { type: 'string', demandOption: true })
        .option('data', { type: 'string', demandOption: true })
        .option('out', { type: 'string', demandOption: true })
        .option('snr-index', { type: 'number', default: 0 })
        .option('ids', { type: 'string',
                         describe: 'comma-separated sample ids (default: all)' }),
      (args) => runPredict(args))
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      process.stderr.write(`error: ${err ? err.message : msg}\n`);
      process.exit(2);
    })
    .parse();
}

const entry = process.argv[1];
if (entry && (entry.endsWith('cli.js') || entry.endsWith('cbam-cnn'))) {
  main(hideBin(process.argv)).catch((err: Error) => {
    process.stderr.write(`error: ${err.message}\n`);
    process.exit(2);
  });
}
