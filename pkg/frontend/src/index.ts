export { mulberry32, shuffledIndices, deriveSeed } from './rng.js';
export { DatasetManifest, MANIFEST_NAME, loadManifest, parseManifest,
         planesName, labelsName } from './manifest.js';
export { LoadedSplit, loadSplit, readPlanes, readLabels, normalizePlanes,
         holdoutSplit } from './dataset.js';
export { NetworkSpec, ConvLayerSpec, defaultSpec, validateSpec,
         convOutputDims, checkAgainstManifest, loadSpecFile } from './spec.js';
export { attachCbam, ChannelStatsLayer, GateLayer, CbamOutputs } from './cbam.js';
export { SeededDropout } from './dropout.js';
export { buildNetwork, BuildOptions } from './model.js';
export { meanSquaredAngleLoss } from './loss.js';
export { trainNetwork, TrainOptions, TrainRun } from './train.js';
export { predictAngles, writePredictionsCsv } from './predict.js';
export { saveArtifact, loadArtifact, restoreModel, WeightsArtifact } from './io.js';
