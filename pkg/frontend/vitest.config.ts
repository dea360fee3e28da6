import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    // the e2e file boots the real annotation service, give it room
    testTimeout: 30_000,
    hookTimeout: 30_000,
  },
});
