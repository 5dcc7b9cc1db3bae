/**
 * Boots the session service in mock mode, registers the bundled trip
 * collection (plus a copy whose reply task is forced to fail, for the
 * error-path test), builds their memory trees, and hands the base URL to
 * the tests.
 */

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import path from 'node:path';
import { fileURLToPath } from 'node:url';
import type { TestProject } from 'vitest/node';

const here = path.dirname(fileURLToPath(import.meta.url));
const fixtureDir = path.resolve(here, '..', '..', 'tests', 'fixtures', 'collections', 'trip');

let server: ChildProcess | null = null;
let storeDir: string | null = null;

function loadTripCollection(): { manifest: Record<string, unknown>; annotations: Record<string, unknown> } {
  const manifest = JSON.parse(readFileSync(path.join(fixtureDir, 'manifest.json'), 'utf-8'));
  for (const photo of manifest.photos) {
    photo.source_path = path.join(fixtureDir, photo.source_path);
  }
  if (manifest.portrait_photo) {
    manifest.portrait_photo = path.join(fixtureDir, manifest.portrait_photo);
  }
  const annotations = JSON.parse(readFileSync(path.join(fixtureDir, 'manifest.annotations.json'), 'utf-8'));
  return { manifest, annotations };
}

async function waitForServer(baseUrl: string, timeoutMs = 60_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${baseUrl}/jobs/warmup-probe`);
      if (response.status === 404) {
        return;
      }
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 100));
  }
  throw new Error('session service did not come up in time');
}

async function registerAndBuild(baseUrl: string, collectionId: string, force?: Record<string, unknown>): Promise<void> {
  const { manifest, annotations } = loadTripCollection();
  manifest.collection_id = collectionId;
  if (force) {
    annotations.force = force;
  }
  const created = await fetch(`${baseUrl}/collections`, {
    method: 'POST',
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify({ manifest, annotations }),
  });
  if (created.status !== 201) {
    throw new Error(`collection registration failed: ${created.status} ${await created.text()}`);
  }
  const accepted = await fetch(`${baseUrl}/collections/${collectionId}/build`, {
    method: 'POST',
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify({}),
  });
  const { job_id: jobId } = await accepted.json();
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    const job = await (await fetch(`${baseUrl}/jobs/${jobId}`)).json();
    if (job.status === 'done') {
      return;
    }
    if (job.status === 'failed') {
      throw new Error(`build failed: ${job.error}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 50));
  }
  throw new Error('build job timed out');
}

export default async function setup(project: TestProject): Promise<() => void> {
  const port = 8900 + (process.pid % 500);
  const baseUrl = `http://127.0.0.1:${port}`;
  storeDir = mkdtempSync(path.join(tmpdir(), 'reviver-ui-store-'));

  server = spawn(
    'python3',
    ['-m', 'reviver', 'serve', '--host', '127.0.0.1', '--port', String(port), '--mode', 'mock', '--store', storeDir],
    { stdio: ['ignore', 'inherit', 'inherit'] },
  );
  await waitForServer(baseUrl);
  await registerAndBuild(baseUrl, 'trip');
  await registerAndBuild(baseUrl, 'trip-flaky', { transport_fail_tasks: ['gen_reply'] });

  project.provide('baseUrl', baseUrl);
  project.provide('collectionId', 'trip');
  project.provide('flakyCollectionId', 'trip-flaky');

  return () => {
    server?.kill('SIGTERM');
    if (storeDir) {
      rmSync(storeDir, { recursive: true, force: true });
    }
  };
}

declare module 'vitest' {
  export interface ProvidedContext {
    baseUrl: string;
    collectionId: string;
    flakyCollectionId: string;
  }
}
