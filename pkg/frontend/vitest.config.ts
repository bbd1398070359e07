import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['test/**/*.test.ts'],
    testTimeout: 120_000,
    hookTimeout: 120_000,
    // tfjs keeps global tensor state; one worker keeps memory bookkeeping sane
    pool: 'threads',
    poolOptions: { threads: { singleThread: true } },
  },
});
