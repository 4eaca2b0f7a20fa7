/**
 * HTTP surface of the correction backend.
 *
 * GET  /health  -> 200 {"status":"ok"}
 * POST /correct -> 200 {"corrected_sentence": string, "confidence": number}
 *
 * Malformed request bodies get a 400 with an error document; a model
 * failure gets a 503. Responses carry exactly the two declared fields and
 * the server holds no per-request state.
 */
import http from 'node:http';

import type { BackendConfig } from './config.js';
import type { CorrectionInput, ModelAdapter } from './model.js';

const JSON_HEADERS = { 'Content-Type': 'application/json; charset=utf-8' };

function sendJson(res: http.ServerResponse, status: number, payload: unknown): void {
  const body = Buffer.from(JSON.stringify(payload), 'utf-8');
  res.writeHead(status, { ...JSON_HEADERS, 'Content-Length': body.byteLength });
  res.end(body);
}

function clamp01(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(1, Math.max(0, value));
}

export function parseCorrectionBody(raw: string): CorrectionInput {
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new Error('request body is not valid JSON');
  }
  if (typeof parsed !== 'object' || parsed === null || Array.isArray(parsed)) {
    throw new Error('request body must be a JSON object');
  }
  const body = parsed as Record<string, unknown>;
  for (const field of ['context', 'question', 'error_sentence'] as const) {
    if (typeof body[field] !== 'string') {
      throw new Error(`field "${field}" must be a string`);
    }
  }
  return {
    context: body.context as string,
    question: body.question as string,
    error_sentence: body.error_sentence as string,
  };
}

export function createServer(config: BackendConfig, model: ModelAdapter): http.Server {
  return http.createServer((req, res) => {
    if (req.method === 'GET' && req.url === '/health') {
      sendJson(res, 200, { status: 'ok' });
      return;
    }
    if (req.method === 'POST' && req.url === '/correct') {
      const chunks: Buffer[] = [];
      req.on('data', (chunk: Buffer) => chunks.push(chunk));
      req.on('end', () => {
        let input: CorrectionInput;
        try {
          input = parseCorrectionBody(Buffer.concat(chunks).toString('utf-8'));
        } catch (err) {
          sendJson(res, 400, { error: err instanceof Error ? err.message : 'bad request' });
          return;
        }
        model
          .generate(input)
          .then((output) => {
            sendJson(res, 200, {
              corrected_sentence: output.corrected_sentence,
              confidence: clamp01(output.confidence),
            });
          })
          .catch((err: unknown) => {
            sendJson(res, 503, {
              error: err instanceof Error ? err.message : 'model failure',
            });
          });
      });
      return;
    }
    sendJson(res, 404, { error: `no route for ${req.method} ${req.url}` });
  });
}

export function listen(server: http.Server, config: BackendConfig): Promise<number> {
  return new Promise((resolve, reject) => {
    server.once('error', reject);
    server.listen(config.port, config.host, () => {
      const address = server.address();
      if (address === null || typeof address === 'string') {
        reject(new Error('server address unavailable'));
        return;
      }
      resolve(address.port);
    });
  });
}
