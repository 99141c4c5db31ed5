import { defineConfig } from "vitest/config";

// The round-trip suites spawn the Python service and command-line runs,
// so the timeouts allow for interpreter startup on a cold machine.
export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    environment: "node",
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
