/**
 * Backbones turn an RGB image into (a) a high-level feature stack from the
 * penultimate convolutional stage and (b) per-class score maps from a 1x1
 * convolution as the last layer.  Both come out at 1/8 of the input
 * resolution.
 *
 * The built-in "toy" backbone is fully deterministic: a fixed 1x1
 * color-opponent + luma projection, three stride-2 3x3 mean convolutions,
 * a linear 1x1 class-score head over four palette classes, and
 * tanh-saturated trunk responses as the feature stack.  Saved tfjs
 * LayersModels can be used instead via `file:<dir>` with named taps.
 */

import * as fs from 'fs';
import * as path from 'path';
import * as tf from '@tensorflow/tfjs';

import { Image } from './png';

export interface ForwardResult {
  /** [channels, h/8, w/8] features, C-order. */
  features: { shape: [number, number, number]; data: Float32Array };
  /** [numClasses, h/8, w/8] class-score maps, C-order. */
  classMaps: { shape: [number, number, number]; data: Float32Array };
  predLabel: number;
}

export interface Backbone {
  name: string;
  numClasses: number;
  featureChannels: number;
  stride: number;
  forward(image: Image): ForwardResult;
}

export const TOY_PALETTE: ReadonlyArray<[number, number, number]> = [
  [220, 50, 50], // red
  [60, 200, 70], // green
  [60, 80, 220], // blue
  [210, 200, 60], // yellow
];

// rows: R-G, G-B, B-(R+G)/2, luma, R-(G+B)/2, (R+B)/2-G
const OPPONENT_ROWS = [
  [1.0, -1.0, 0.0],
  [0.0, 1.0, -1.0],
  [-0.5, -0.5, 1.0],
  [0.299, 0.587, 0.114],
  [1.0, -0.5, -0.5],
  [0.5, -1.0, 0.5],
];
const LUMA_CHANNEL = 3;
const FEATURE_GAIN = [14.0, 14.0, 14.0, 2.0, 14.0, 14.0];

function paletteClassWeights(): number[][] {
  // each class's signature is its palette color's opponent response,
  // unit-normalized, with the luma channel zeroed out
  return TOY_PALETTE.map((rgb) => {
    const scaled = rgb.map((v) => v / 255);
    const response = OPPONENT_ROWS.map((row) =>
      row[0] * scaled[0] + row[1] * scaled[1] + row[2] * scaled[2],
    );
    response[LUMA_CHANNEL] = 0;
    const norm = Math.hypot(...response);
    return response.map((v) => v / norm);
  });
}

function toChannelsFirst(t: tf.Tensor4D): { shape: [number, number, number]; data: Float32Array } {
  const [, h, w, c] = t.shape;
  const moved = tf.transpose(t.squeeze([0]), [2, 0, 1]);
  const data = moved.dataSync() as Float32Array;
  moved.dispose();
  return { shape: [c, h, w], data: Float32Array.from(data) };
}

class ToyBackbone implements Backbone {
  name = 'toy';
  numClasses = TOY_PALETTE.length;
  featureChannels = OPPONENT_ROWS.length;
  stride = 8;

  forward(image: Image): ForwardResult {
    if (image.width % this.stride !== 0 || image.height % this.stride !== 0) {
      throw new Error(
        `image size ${image.width}x${image.height} must be a multiple of ${this.stride}`,
      );
    }
    return tf.tidy(() => {
      const pixels = new Float32Array(image.width * image.height * 3);
      for (let i = 0; i < image.width * image.height; i++) {
        if (image.channels === 3) {
          pixels[i * 3] = image.data[i * 3] / 255;
          pixels[i * 3 + 1] = image.data[i * 3 + 1] / 255;
          pixels[i * 3 + 2] = image.data[i * 3 + 2] / 255;
        } else {
          const v = image.data[i] / 255;
          pixels[i * 3] = v;
          pixels[i * 3 + 1] = v;
          pixels[i * 3 + 2] = v;
        }
      }
      const x = tf.tensor4d(pixels, [1, image.height, image.width, 3]);

      const c = this.featureChannels;
      const projection = tf.tensor4d(
        Float32Array.from(
          Array.from({ length: 3 * c }, (_, i) => OPPONENT_ROWS[i % c][Math.floor(i / c)]),
        ),
        [1, 1, 3, c],
      );
      let trunk = tf.conv2d(x, projection, 1, 'same');

      const smooth = tf.tensor4d(new Float32Array(9 * c).fill(1 / 9), [3, 3, c, 1]);
      for (let stage = 0; stage < 3; stage++) {
        trunk = tf.depthwiseConv2d(trunk as tf.Tensor4D, smooth, 2, 'same');
      }

      const classWeights = paletteClassWeights();
      const classKernel = tf.tensor4d(
        Float32Array.from(
          Array.from({ length: c * this.numClasses }, (_, i) =>
            classWeights[i % this.numClasses][Math.floor(i / this.numClasses)],
          ),
        ),
        [1, 1, c, this.numClasses],
      );
      const classMaps = tf.conv2d(trunk as tf.Tensor4D, classKernel, 1, 'same');
      const features = tf.tanh(tf.mul(trunk, tf.tensor1d(FEATURE_GAIN)));

      const means = tf.mean(classMaps, [1, 2]).dataSync();
      let predLabel = 0;
      for (let i = 1; i < means.length; i++) if (means[i] > means[predLabel]) predLabel = i;

      return {
        features: toChannelsFirst(features as tf.Tensor4D),
        classMaps: toChannelsFirst(classMaps as tf.Tensor4D),
        predLabel,
      };
    });
  }
}

class FileBackbone implements Backbone {
  name: string;
  numClasses: number;
  featureChannels: number;
  stride: number;
  private readonly tapped: tf.LayersModel;
  private readonly featureTaps: number;

  /** featureLayers: one tap by default; several names concatenate their
   * channels (all taps must share the map's spatial resolution). */
  constructor(model: tf.LayersModel, featureLayers: string[], mapLayer: string, stride = 8) {
    this.name = `file:${model.name}`;
    this.stride = stride;
    this.featureTaps = featureLayers.length;
    const featureOuts = featureLayers.map(
      (name) => model.getLayer(name).output as tf.SymbolicTensor,
    );
    const mapOut = model.getLayer(mapLayer).output as tf.SymbolicTensor;
    this.tapped = tf.model({ inputs: model.inputs, outputs: [...featureOuts, mapOut] });
    this.featureChannels = featureOuts.reduce(
      (sum, out) => sum + (out.shape[out.shape.length - 1] as number),
      0,
    );
    this.numClasses = mapOut.shape[mapOut.shape.length - 1] as number;
  }

  forward(image: Image): ForwardResult {
    return tf.tidy(() => {
      const pixels = new Float32Array(image.width * image.height * 3);
      for (let i = 0; i < image.width * image.height; i++) {
        for (let ch = 0; ch < 3; ch++) {
          pixels[i * 3 + ch] = image.data[i * image.channels + (image.channels === 3 ? ch : 0)] / 255;
        }
      }
      const x = tf.tensor4d(pixels, [1, image.height, image.width, 3]);
      const outputs = this.tapped.predict(x) as tf.Tensor4D[];
      const classMaps = outputs[this.featureTaps];
      const features =
        this.featureTaps === 1 ? outputs[0] : (tf.concat(outputs.slice(0, this.featureTaps), 3) as tf.Tensor4D);
      const means = tf.mean(classMaps, [1, 2]).dataSync();
      let predLabel = 0;
      for (let i = 1; i < means.length; i++) if (means[i] > means[predLabel]) predLabel = i;
      return {
        features: toChannelsFirst(features),
        classMaps: toChannelsFirst(classMaps),
        predLabel,
      };
    });
  }
}

async function loadSavedModel(dir: string): Promise<tf.LayersModel> {
  const modelJson = JSON.parse(fs.readFileSync(path.join(dir, 'model.json'), 'utf8'));
  const manifest = modelJson.weightsManifest as Array<{ paths: string[]; weights: tf.io.WeightsManifestEntry[] }>;
  const weightSpecs: tf.io.WeightsManifestEntry[] = [];
  const shards: Buffer[] = [];
  for (const group of manifest) {
    weightSpecs.push(...group.weights);
    for (const rel of group.paths) shards.push(fs.readFileSync(path.join(dir, rel)));
  }
  const weightData = new Uint8Array(Buffer.concat(shards)).buffer;
  return tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology: modelJson.modelTopology,
      weightSpecs,
      weightData,
      format: modelJson.format,
      generatedBy: modelJson.generatedBy,
      convertedBy: modelJson.convertedBy,
    }),
  );
}

export interface BackboneOptions {
  featureLayer?: string;
  mapLayer?: string;
}

export async function resolveBackbone(id: string, options: BackboneOptions = {}): Promise<Backbone> {
  if (id === 'toy') return new ToyBackbone();
  if (id.startsWith('file:')) {
    const dir = id.slice('file:'.length);
    if (!options.featureLayer || !options.mapLayer) {
      throw new Error('file backbones need --feature-layer and --map-layer');
    }
    const taps = options.featureLayer
      .split(',')
      .map((s) => s.trim())
      .filter((s) => s.length > 0);
    const model = await loadSavedModel(dir);
    return new FileBackbone(model, taps, options.mapLayer);
  }
  throw new Error(`unknown backbone '${id}' (expected 'toy' or 'file:<dir>')`);
}
