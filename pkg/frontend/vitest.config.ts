import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    include: ["test/**/*.test.ts"],
    // Console tests drive a live simulation server subprocess.
    testTimeout: 30000,
    hookTimeout: 30000,
    fileParallelism: false,
  },
});
