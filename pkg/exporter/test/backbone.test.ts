import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

import * as tf from '@tensorflow/tfjs';
import { describe, expect, it } from 'vitest';

import { resolveBackbone } from '../src/backbone';
import { makeScene } from './samples';

describe('toy backbone', () => {
  it('emits stride-8 feature and class-map stacks', async () => {
    const backbone = await resolveBackbone('toy');
    const scene = makeScene(1, 0);
    const out = backbone.forward(scene.image);
    expect(out.features.shape).toEqual([backbone.featureChannels, 32, 32]);
    expect(out.classMaps.shape).toEqual([backbone.numClasses, 32, 32]);
    expect(out.features.data.every((v) => Number.isFinite(v))).toBe(true);
  });

  it('is deterministic', async () => {
    const backbone = await resolveBackbone('toy');
    const scene = makeScene(2, 1);
    const a = backbone.forward(scene.image);
    const b = backbone.forward(scene.image);
    expect(Array.from(a.features.data)).toEqual(Array.from(b.features.data));
    expect(Array.from(a.classMaps.data)).toEqual(Array.from(b.classMaps.data));
    expect(a.predLabel).toBe(b.predLabel);
  });

  it('predicts the vivid object color as the top class', async () => {
    const backbone = await resolveBackbone('toy');
    for (const label of [0, 1, 2, 3]) {
      const scene = makeScene(40 + label, label);
      expect(backbone.forward(scene.image).predLabel).toBe(label);
    }
  });

  it('rejects sizes that are not multiples of the stride', async () => {
    const backbone = await resolveBackbone('toy');
    const bad = { width: 50, height: 48, channels: 3 as const, data: new Uint8Array(50 * 48 * 3) };
    expect(() => backbone.forward(bad)).toThrow(/multiple of 8/);
  });

  it('rejects unknown backbone ids', async () => {
    await expect(resolveBackbone('resnet999')).rejects.toThrow(/unknown backbone/);
  });
});

describe('file backbone', () => {
  async function saveTinyModel(): Promise<string> {
    const input = tf.input({ shape: [null, null, 3] });
    const trunk = tf.layers
      .conv2d({ filters: 5, kernelSize: 3, strides: 8, padding: 'same', name: 'trunk' })
      .apply(input) as tf.SymbolicTensor;
    const side = tf.layers
      .conv2d({ filters: 2, kernelSize: 1, name: 'side' })
      .apply(trunk) as tf.SymbolicTensor;
    const scores = tf.layers
      .conv2d({ filters: 4, kernelSize: 1, name: 'scores' })
      .apply(trunk) as tf.SymbolicTensor;
    const model = tf.model({ inputs: input, outputs: [scores, side] });

    const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'tfjs-model-'));
    await model.save(
      tf.io.withSaveHandler(async (artifacts) => {
        const weightData = artifacts.weightData as ArrayBuffer;
        fs.writeFileSync(
          path.join(dir, 'model.json'),
          JSON.stringify({
            modelTopology: artifacts.modelTopology,
            format: artifacts.format,
            generatedBy: artifacts.generatedBy,
            convertedBy: artifacts.convertedBy,
            weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
          }),
        );
        fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(weightData));
        return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
      }),
    );
    return dir;
  }

  it('loads a saved LayersModel and taps named layers', async () => {
    const dir = await saveTinyModel();
    const backbone = await resolveBackbone(`file:${dir}`, {
      featureLayer: 'trunk',
      mapLayer: 'scores',
    });
    expect(backbone.featureChannels).toBe(5);
    expect(backbone.numClasses).toBe(4);
    const scene = makeScene(3, 2);
    const out = backbone.forward(scene.image);
    expect(out.features.shape).toEqual([5, 32, 32]);
    expect(out.classMaps.shape).toEqual([4, 32, 32]);
  });

  it('concatenates multiple feature taps channel-wise', async () => {
    const dir = await saveTinyModel();
    const backbone = await resolveBackbone(`file:${dir}`, {
      featureLayer: 'trunk,side',
      mapLayer: 'scores',
    });
    expect(backbone.featureChannels).toBe(7);
    const out = backbone.forward(makeScene(4, 1).image);
    expect(out.features.shape).toEqual([7, 32, 32]);
  });

  it('requires tap names', async () => {
    await expect(resolveBackbone('file:/nowhere')).rejects.toThrow(/feature-layer/);
  });
});
