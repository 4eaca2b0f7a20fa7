/** CLI entry point: parse flags, resolve the model, serve forever. */
import { parseArgs } from './config.js';
import { resolveModel } from './model.js';
import { createServer, listen } from './server.js';

async function main(): Promise<void> {
  let config;
  try {
    config = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    console.error(
      'usage: medifact-qa-server [--model ID] [--max-length N] [--device D] [--host H] [--port P]',
    );
    process.exit(2);
  }
  let model;
  try {
    model = await resolveModel(config);
  } catch (err) {
    console.error(`error: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
  const server = createServer(config, model);
  const port = await listen(server, config);
  console.log(`qa_server model=${model.name} listening on http://${config.host}:${port}`);
  const shutdown = () => server.close(() => process.exit(0));
  process.on('SIGINT', shutdown);
  process.on('SIGTERM', shutdown);
}

main().catch((err) => {
  console.error(err);
  process.exit(1);
});
