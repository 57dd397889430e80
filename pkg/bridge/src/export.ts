/**
 * Export routines: sequence encoder calls over inputs and assemble
 * EMB1 stores whose layout and metadata conventions match what the
 * Python toolkit reads (`class:<k>/tpl:<j>` prompt ids, comma-joined
 * class_names, pipe-joined templates, group ids on video frames).
 */
import {
  Emb1Store,
  EmbeddingRecord,
  SpaceTag,
  UNLABELED,
} from "./emb1.js";
import {
  BridgeConfig,
  Encoder,
  ImageInput,
  validateConfig,
} from "./encoder.js";

export const FRAMES_PER_CLIP = 16;

export class ExportError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ExportError";
  }
}

function baseMetadata(encoder: Encoder, config: BridgeConfig) {
  return {
    backbone: encoder.backboneId,
    image_size: String(config.imageSize),
  };
}

export async function exportVisual(
  images: ImageInput[],
  encoder: Encoder,
  config: BridgeConfig,
): Promise<Emb1Store> {
  validateConfig(config);
  const records: EmbeddingRecord[] = [];
  for (const image of images) {
    records.push({
      id: image.id,
      vector: await encoder.encodeImage(image),
      label: image.label ?? UNLABELED,
      group: image.group ?? "",
    });
  }
  return {
    dim: encoder.visionDim,
    spaceTag: SpaceTag.visual,
    records,
    metadata: baseMetadata(encoder, config),
  };
}

/**
 * Uniformly pick FRAMES_PER_CLIP frames (all of them when the clip is
 * shorter) and tag each with the clip id as its group, so the toolkit
 * pools them back into one sample.
 */
export function sampleClipFrames(
  frames: ImageInput[],
  clipId: string,
): ImageInput[] {
  if (frames.length === 0) {
    throw new ExportError(`clip ${JSON.stringify(clipId)} has no frames`);
  }
  const n = Math.min(FRAMES_PER_CLIP, frames.length);
  const picked: ImageInput[] = [];
  for (let i = 0; i < n; i++) {
    const idx = Math.floor((i * frames.length) / n);
    picked.push({ ...frames[idx], group: clipId });
  }
  return picked;
}

export function fillTemplate(template: string, className: string): string {
  if (!template.includes("{class name}")) {
    throw new ExportError(
      `template ${JSON.stringify(template)} lacks the class placeholder`,
    );
  }
  return template.replaceAll("{class name}", className);
}

export async function exportTextual(
  classNames: string[],
  templates: string[],
  encoder: Encoder,
  config: BridgeConfig,
): Promise<Emb1Store> {
  validateConfig(config);
  if (classNames.length < 2) {
    throw new ExportError("a prompt export needs at least 2 classes");
  }
  if (templates.length === 0) {
    throw new ExportError("a prompt export needs at least 1 template");
  }
  const records: EmbeddingRecord[] = [];
  for (let k = 0; k < classNames.length; k++) {
    for (let j = 0; j < templates.length; j++) {
      records.push({
        id: `class:${k}/tpl:${j}`,
        vector: await encoder.encodeText(
          fillTemplate(templates[j], classNames[k]),
        ),
        label: k,
        group: "",
      });
    }
  }
  return {
    dim: encoder.visionDim,
    spaceTag: SpaceTag.textual,
    records,
    metadata: {
      ...baseMetadata(encoder, config),
      class_names: classNames.join(","),
      templates: templates.join("|"),
    },
  };
}

export async function exportLlmTargets(
  images: ImageInput[],
  encoder: Encoder,
  config: BridgeConfig,
): Promise<Emb1Store> {
  validateConfig(config);
  const records: EmbeddingRecord[] = [];
  for (const image of images) {
    records.push({
      id: image.id,
      vector: await encoder.encodeTarget(image, config.instruction),
      label: image.label ?? UNLABELED,
      group: image.group ?? "",
    });
  }
  return {
    dim: encoder.targetDim,
    spaceTag: SpaceTag.llm_target,
    records,
    metadata: {
      ...baseMetadata(encoder, config),
      llm_encoder: config.llmEncoderId,
      instruction: config.instruction,
      pooling: "mean_final_layer",
    },
  };
}
