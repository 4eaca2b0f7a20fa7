/**
 * Model adapters behind the correction endpoint.
 *
 * The echo stub ships so protocol contract tests run with no model weights;
 * a real seq2seq QA model plugs in through the same interface. Inference is
 * serialized behind a promise queue: adapters never see concurrent calls.
 */
import type { BackendConfig } from './config.js';

export interface CorrectionInput {
  context: string;
  question: string;
  error_sentence: string;
}

export interface CorrectionOutput {
  corrected_sentence: string;
  /** Normalized generation score in [0, 1]. */
  confidence: number;
}

export interface ModelAdapter {
  readonly name: string;
  generate(input: CorrectionInput): Promise<CorrectionOutput>;
}

/** Copy-through stub: deterministic, no weights, greedy by construction. */
export class EchoStubModel implements ModelAdapter {
  readonly name = 'echo';

  async generate(input: CorrectionInput): Promise<CorrectionOutput> {
    return { corrected_sentence: input.error_sentence, confidence: 0.5 };
  }
}

/** Serializes generate() calls so the underlying model runs one at a time. */
export class QueuedModel implements ModelAdapter {
  readonly name: string;
  private tail: Promise<unknown> = Promise.resolve();

  constructor(private readonly inner: ModelAdapter) {
    this.name = inner.name;
  }

  generate(input: CorrectionInput): Promise<CorrectionOutput> {
    const next = this.tail.then(() => this.inner.generate(input));
    this.tail = next.catch(() => undefined);
    return next;
  }
}

/**
 * Resolve the configured model identifier to an adapter.
 *
 * Only the echo stub is bundled; any other identifier is expected to be a
 * seq2seq checkpoint served by an optional adapter package, and resolving it
 * without that package installed is a startup error (not a 503; the health
 * endpoint only reports on servers that did come up).
 */
export async function resolveModel(config: BackendConfig): Promise<ModelAdapter> {
  if (config.model === 'echo') {
    return new QueuedModel(new EchoStubModel());
  }
  throw new Error(
    `model "${config.model}" is not available in this build; ` +
      'install a generation adapter or run with --model echo',
  );
}
