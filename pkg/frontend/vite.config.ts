import { defineConfig } from 'vite';

export default defineConfig({
  // the composer is served by `modforge serve --ui frontend/dist`, same origin
  // as the /v1 API; the dev server proxies to a locally running service
  server: {
    proxy: {
      '/v1': 'http://127.0.0.1:8080',
    },
  },
  build: {
    target: 'es2020',
  },
  test: {
    environment: 'jsdom',
    include: ['test/**/*.test.ts'],
  },
});
