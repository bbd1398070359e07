import * as fs from 'node:fs';

import { DatasetManifest } from './manifest.js';

export interface ConvLayerSpec {
  filters: number;
  kernel: number;
  stride: number;
}

/** Architecture description; every field is checked before any tensor work. */
export interface NetworkSpec {
  inputM: number;
  channels: number;
  convLayers: ConvLayerSpec[];
  fcLayers: number[];
  dropout: number;
  outputs: number;
  /** CAM perceptron bottleneck divisor */
  camReduction: number;
}

export const DEFAULT_CONV: ConvLayerSpec[] = [
  { filters: 8, kernel: 3, stride: 1 },
  { filters: 16, kernel: 3, stride: 1 },
  { filters: 32, kernel: 3, stride: 1 },
];

export function defaultSpec(inputM: number, outputs: number): NetworkSpec {
  return {
    inputM,
    channels: 2,
    convLayers: DEFAULT_CONV.map((c) => ({ ...c })),
    fcLayers: [256, 64],
    dropout: 0.2,
    outputs,
    camReduction: 8,
  };
}

/**
 * Walk the conv stack and return the spatial dim after each layer.
 * Valid (unpadded) convolutions only: M_c = (M_{c-1} - e_c)/S + 1 must be
 * a positive integer at every step.
 */
export function convOutputDims(spec: NetworkSpec): number[] {
  const dims: number[] = [];
  let m = spec.inputM;
  for (const [i, layer] of spec.convLayers.entries()) {
    const next = (m - layer.kernel) / layer.stride + 1;
    if (!Number.isInteger(next) || next < 1) {
      throw new Error(
        `conv layer ${i + 1}: (${m} - ${layer.kernel})/${layer.stride} + 1 = ` +
        `${next} is not a positive integer`);
    }
    dims.push(next);
    m = next;
  }
  return dims;
}

export function validateSpec(spec: NetworkSpec): void {
  if (spec.inputM < 1 || spec.outputs < 1) {
    throw new Error('inputM and outputs must be positive');
  }
  if (spec.channels !== 2) {
    throw new Error('input has exactly 2 channels (Re, Im)');
  }
  if (spec.convLayers.length === 0) {
    throw new Error('need at least one conv layer');
  }
  if (spec.dropout < 0 || spec.dropout >= 1) {
    throw new Error(`dropout rate ${spec.dropout} outside [0, 1)`);
  }
  convOutputDims(spec);
  const lastFilters = spec.convLayers[spec.convLayers.length - 1].filters;
  if (Math.floor(lastFilters / spec.camReduction) < 1) {
    throw new Error(
      `channel attention bottleneck ${lastFilters}/${spec.camReduction} ` +
      'collapses to zero units');
  }
}

export function checkAgainstManifest(spec: NetworkSpec,
                                     manifest: DatasetManifest): void {
  if (spec.inputM !== manifest.mElements) {
    throw new Error(
      `spec inputM=${spec.inputM} but dataset holds M=${manifest.mElements}`);
  }
  if (spec.channels !== manifest.channels) {
    throw new Error(
      `spec channels=${spec.channels} but dataset holds ${manifest.channels}`);
  }
  if (spec.outputs !== manifest.qSources) {
    throw new Error(
      `spec outputs=${spec.outputs} but dataset labels have Q=${manifest.qSources}`);
  }
}

/** Read a spec JSON file; absent fields fall back to the default stack. */
export function loadSpecFile(path: string, inputM: number,
                             outputs: number): NetworkSpec {
  const raw = JSON.parse(fs.readFileSync(path, 'utf8'));
  const base = defaultSpec(inputM, outputs);
  const spec: NetworkSpec = { ...base, ...raw };
  validateSpec(spec);
  return spec;
}
