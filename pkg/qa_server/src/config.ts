/** Server configuration and CLI flag parsing. */

export interface BackendConfig {
  /** Model identifier; "echo" is the built-in no-weights stub. */
  model: string;
  /** Upper bound on generated tokens; must be positive. */
  maxGenerationLength: number;
  /** Device selector, forwarded to the model adapter ("cpu", "cuda:0", ...). */
  device: string;
  host: string;
  port: number;
}

export const DEFAULT_CONFIG: BackendConfig = {
  model: 'echo',
  maxGenerationLength: 64,
  device: 'cpu',
  host: '127.0.0.1',
  port: 8080,
};

export function validateConfig(config: BackendConfig): BackendConfig {
  if (!Number.isFinite(config.maxGenerationLength) || config.maxGenerationLength <= 0) {
    throw new Error(`max generation length must be positive, got ${config.maxGenerationLength}`);
  }
  if (!Number.isInteger(config.port) || config.port < 0 || config.port > 65535) {
    throw new Error(`port must be in [0, 65535], got ${config.port}`);
  }
  if (!config.model) {
    throw new Error('model identifier must be non-empty');
  }
  return config;
}

/** Parse `--flag value` pairs; unknown flags are an error. */
export function parseArgs(argv: string[]): BackendConfig {
  const config = { ...DEFAULT_CONFIG };
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (value === undefined) {
      throw new Error(`flag ${flag} is missing a value`);
    }
    switch (flag) {
      case '--model':
        config.model = value;
        break;
      case '--max-length':
        config.maxGenerationLength = Number(value);
        break;
      case '--device':
        config.device = value;
        break;
      case '--host':
        config.host = value;
        break;
      case '--port':
        config.port = Number(value);
        break;
      default:
        throw new Error(`unknown flag ${flag}`);
    }
  }
  return validateConfig(config);
}
