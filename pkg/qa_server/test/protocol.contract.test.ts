import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { DEFAULT_CONFIG } from '../src/config.js';
import { EchoStubModel, QueuedModel, type ModelAdapter } from '../src/model.js';
import { createServer, listen } from '../src/server.js';
import type http from 'node:http';

let server: http.Server;
let baseUrl: string;

beforeAll(async () => {
  const config = { ...DEFAULT_CONFIG, port: 0 };
  server = createServer(config, new QueuedModel(new EchoStubModel()));
  const port = await listen(server, config);
  baseUrl = `http://127.0.0.1:${port}`;
});

afterAll(() => {
  server.close();
});

async function postCorrect(body: unknown, raw = false): Promise<Response> {
  return fetch(`${baseUrl}/correct`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json; charset=utf-8' },
    body: raw ? (body as string) : JSON.stringify(body),
  });
}

describe('health probe', () => {
  it('returns 200 {"status":"ok"}', async () => {
    const res = await fetch(`${baseUrl}/health`);
    expect(res.status).toBe(200);
    expect(await res.json()).toEqual({ status: 'ok' });
  });
});

describe('POST /correct round trip', () => {
  it('answers with exactly the two declared fields', async () => {
    const res = await postCorrect({
      context: 'Patient context paragraph.',
      question: 'What single word is wrong?',
      error_sentence: 'He was given asprin.',
    });
    expect(res.status).toBe(200);
    const body = (await res.json()) as Record<string, unknown>;
    expect(Object.keys(body).sort()).toEqual(['confidence', 'corrected_sentence']);
    expect(typeof body.corrected_sentence).toBe('string');
    expect(body.confidence).toBeGreaterThanOrEqual(0);
    expect(body.confidence).toBeLessThanOrEqual(1);
  });

  it('is stateless: the same request twice yields the same response', async () => {
    const payload = {
      context: 'Some context.',
      question: 'Q?',
      error_sentence: 'Sentence with a problm.',
    };
    const first = await (await postCorrect(payload)).text();
    const second = await (await postCorrect(payload)).text();
    expect(second).toBe(first);
  });

  it('returns a sentence-shaped answer for a masked vignette', async () => {
    // shape contract with the stubbed model, not a medical-answer check
    const res = await postCorrect({
      context:
        'A 5-year-old male presents with vesicular lesions on the lips and gingiva. ' +
        'Patient is diagnosed with an [MASK] infection.',
      question: 'Which condition fills the mask?',
      error_sentence: 'Patient is diagnosed with an [MASK] infection.',
    });
    expect(res.status).toBe(200);
    const body = (await res.json()) as { corrected_sentence: string; confidence: number };
    expect(body.corrected_sentence.length).toBeGreaterThan(0);
    expect(body.corrected_sentence.trim().endsWith('.')).toBe(true);
  });
});

describe('malformed bodies', () => {
  it('rejects invalid JSON with 400 and an error document', async () => {
    const res = await postCorrect('{not json', true);
    expect(res.status).toBe(400);
    const body = (await res.json()) as { error: string };
    expect(body.error).toContain('JSON');
  });

  it('rejects missing fields with 400 naming the field', async () => {
    const res = await postCorrect({ context: 'only context' });
    expect(res.status).toBe(400);
    const body = (await res.json()) as { error: string };
    expect(body.error).toContain('question');
  });

  it('rejects non-object bodies with 400', async () => {
    const res = await postCorrect([1, 2, 3]);
    expect(res.status).toBe(400);
  });

  it('rejects non-string fields with 400', async () => {
    const res = await postCorrect({ context: 'c', question: 'q', error_sentence: 42 });
    expect(res.status).toBe(400);
  });
});

describe('UTF-8 preservation', () => {
  it('echoes clinical symbols byte-for-byte outside the edited span', async () => {
    const sentence = 'Vital signs: T 39.1°C, dosing 5 μg·kg⁻¹, SpO₂ 99%.';
    const res = await postCorrect({
      context: `Context with ${sentence}`,
      question: 'Q?',
      error_sentence: sentence,
    });
    expect(res.status).toBe(200);
    const body = (await res.json()) as { corrected_sentence: string };
    const got = Buffer.from(body.corrected_sentence, 'utf-8');
    const want = Buffer.from(sentence, 'utf-8');
    expect(got.equals(want)).toBe(true);
  });
});

describe('unknown routes', () => {
  it('404s with an error document', async () => {
    const res = await fetch(`${baseUrl}/nope`);
    expect(res.status).toBe(404);
  });
});

describe('model failure', () => {
  it('maps a throwing adapter to 503', async () => {
    const failing: ModelAdapter = {
      name: 'failing',
      generate: async () => {
        throw new Error('weights exploded');
      },
    };
    const config = { ...DEFAULT_CONFIG, port: 0 };
    const broken = createServer(config, failing);
    const port = await listen(broken, config);
    try {
      const res = await fetch(`http://127.0.0.1:${port}/correct`, {
        method: 'POST',
        headers: { 'Content-Type': 'application/json' },
        body: JSON.stringify({ context: 'c', question: 'q', error_sentence: 's' }),
      });
      expect(res.status).toBe(503);
      const body = (await res.json()) as { error: string };
      expect(body.error).toContain('weights');
    } finally {
      broken.close();
    }
  });
});
