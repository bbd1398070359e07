/** Small deterministic PRNG so shuffles and seeds never touch Math.random. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) | 0;
    let t = Math.imul(a ^ (a >>> 15), 1 | a);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Fisher-Yates shuffle of 0..n-1 driven by the given PRNG. */
export function shuffledIndices(n: number, rand: () => number): number[] {
  const idx = Array.from({ length: n }, (_, i) => i);
  for (let i = n - 1; i > 0; i--) {
    const j = Math.floor(rand() * (i + 1));
    [idx[i], idx[j]] = [idx[j], idx[i]];
  }
  return idx;
}

/** Derive a fresh 32-bit seed from a base seed and a stream index. */
export function deriveSeed(seed: number, stream: number): number {
  // one mulberry32 step keyed on both words; cheap and collision-resistant
  // enough for layer/step seeding
  const rand = mulberry32((seed ^ Math.imul(stream + 1, 0x9e3779b9)) >>> 0);
  return Math.floor(rand() * 4294967296) >>> 0;
}
