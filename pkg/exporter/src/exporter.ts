/**
 * Dataset export: forward every labeled image through a backbone, write the
 * per-image feature stack and class-score maps as .npy files plus mask/rgb
 * copies, and emit the version-1 manifest the evaluation toolkit loads.
 *
 * The manifest's `cam` entry points at the ground-truth class's score map;
 * the top predicted class's map is written alongside as `<id>_cam_pred.npy`
 * since the schema has a single cam slot.  Ground-truth boxes are the tight
 * boxes of the masks.
 */

import * as fs from 'fs';
import * as path from 'path';

import { Backbone } from './backbone';
import { encodeNpy } from './npy';
import { decodeMask, decodePng } from './png';

export interface LabelsFile {
  labels: Record<string, number>;
}

export interface ManifestRecord {
  id: string;
  width: number;
  height: number;
  cam: string;
  features: string;
  gt_mask: string;
  gt_boxes: number[][];
  gt_label: number;
  pred_label: number;
  rgb: string;
}

export interface ExportResult {
  manifestPath: string;
  exported: string[];
  skipped: string[];
}

function tightBox(mask: Uint8Array, width: number, height: number): number[] | null {
  let x0 = width;
  let y0 = height;
  let x1 = -1;
  let y1 = -1;
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      if (mask[y * width + x]) {
        if (x < x0) x0 = x;
        if (y < y0) y0 = y;
        if (x > x1) x1 = x;
        if (y > y1) y1 = y;
      }
    }
  }
  return x1 < 0 ? null : [x0, y0, x1, y1];
}

function sliceMap(
  maps: { shape: [number, number, number]; data: Float32Array },
  index: number,
): { shape: [number, number]; data: Float32Array } {
  const [, h, w] = maps.shape;
  return { shape: [h, w], data: maps.data.slice(index * h * w, (index + 1) * h * w) };
}

export function loadLabels(labelsPath: string): LabelsFile {
  const doc = JSON.parse(fs.readFileSync(labelsPath, 'utf8'));
  if (typeof doc !== 'object' || doc === null || typeof doc.labels !== 'object') {
    throw new Error(`${labelsPath}: expected {"labels": {"<file>": <class id>}}`);
  }
  return doc as LabelsFile;
}

export async function exportDataset(
  backbone: Backbone,
  imagesDir: string,
  labelsPath: string,
  masksDir: string,
  outDir: string,
  log: (message: string) => void = console.warn,
): Promise<ExportResult> {
  const { labels } = loadLabels(labelsPath);
  fs.mkdirSync(outDir, { recursive: true });

  const files = fs
    .readdirSync(imagesDir)
    .filter((f) => f.toLowerCase().endsWith('.png'))
    .sort();
  if (files.length === 0) throw new Error(`no .png images under ${imagesDir}`);

  const records: ManifestRecord[] = [];
  const exported: string[] = [];
  const skipped: string[] = [];
  for (const file of files) {
    const label = labels[file];
    if (label === undefined) {
      log(`warning: no label for ${file}, skipping`);
      skipped.push(file);
      continue;
    }
    if (!Number.isInteger(label) || label < 0 || label >= backbone.numClasses) {
      throw new Error(`${file}: label ${label} outside [0, ${backbone.numClasses})`);
    }
    const id = path.parse(file).name;
    const maskPath = path.join(masksDir, `${id}.png`);
    if (!fs.existsSync(maskPath)) {
      log(`warning: no mask for ${file}, skipping`);
      skipped.push(file);
      continue;
    }

    const imageBytes = fs.readFileSync(path.join(imagesDir, file));
    const image = decodePng(imageBytes);
    const mask = decodeMask(fs.readFileSync(maskPath));
    if (mask.width !== image.width || mask.height !== image.height) {
      throw new Error(`${file}: mask ${mask.width}x${mask.height} vs image ${image.width}x${image.height}`);
    }
    const box = tightBox(mask.data, mask.width, mask.height);
    if (!box) throw new Error(`${file}: mask has no foreground`);

    const { features, classMaps, predLabel } = backbone.forward(image);
    const camGt = sliceMap(classMaps, label);
    const camPred = sliceMap(classMaps, predLabel);

    fs.writeFileSync(
      path.join(outDir, `${id}_feat.npy`),
      encodeNpy({ dtype: '<f4', shape: features.shape, data: features.data }),
    );
    fs.writeFileSync(
      path.join(outDir, `${id}_cam.npy`),
      encodeNpy({ dtype: '<f4', shape: camGt.shape, data: camGt.data }),
    );
    fs.writeFileSync(
      path.join(outDir, `${id}_cam_pred.npy`),
      encodeNpy({ dtype: '<f4', shape: camPred.shape, data: camPred.data }),
    );
    fs.copyFileSync(maskPath, path.join(outDir, `${id}_mask.png`));
    fs.writeFileSync(path.join(outDir, `${id}_rgb.png`), imageBytes);

    records.push({
      id,
      width: image.width,
      height: image.height,
      cam: `${id}_cam.npy`,
      features: `${id}_feat.npy`,
      gt_mask: `${id}_mask.png`,
      gt_boxes: [box],
      gt_label: label,
      pred_label: predLabel,
      rgb: `${id}_rgb.png`,
    });
    exported.push(file);
  }
  if (records.length === 0) throw new Error('every image was skipped; nothing to export');

  const manifest = { version: 1, num_classes: backbone.numClasses, images: records };
  const manifestPath = path.join(outDir, 'manifest.json');
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + '\n');
  return { manifestPath, exported, skipped };
}
