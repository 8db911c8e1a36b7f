/**
 * Command line: `export --backbone toy --images dir/ --labels labels.json
 * --masks dir/ --out outdir/ [--feature-layer name --map-layer name]`.
 */

import { resolveBackbone } from './backbone';
import { exportDataset } from './exporter';

function parseFlags(argv: string[]): Record<string, string> {
  const flags: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    if (!key.startsWith('--') || i + 1 >= argv.length) {
      throw new Error(`malformed arguments near '${key}'`);
    }
    flags[key.slice(2)] = argv[i + 1];
  }
  return flags;
}

export async function main(argv: string[]): Promise<number> {
  const [command, ...rest] = argv;
  if (command !== 'export') {
    console.error('usage: export --backbone <id> --images <dir> --labels <json> --masks <dir> --out <dir>');
    return 1;
  }
  try {
    const flags = parseFlags(rest);
    for (const required of ['backbone', 'images', 'labels', 'masks', 'out']) {
      if (!flags[required]) throw new Error(`missing --${required}`);
    }
    const backbone = await resolveBackbone(flags.backbone, {
      featureLayer: flags['feature-layer'],
      mapLayer: flags['map-layer'],
    });
    const result = await exportDataset(backbone, flags.images, flags.labels, flags.masks, flags.out);
    console.log(result.manifestPath);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
