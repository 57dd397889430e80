/**
 * Encoder abstraction: anything that turns images and text into dense
 * vectors.  The bridge itself only sequences encoder calls and writes
 * EMB1 files; the encoder is the single component touching model
 * weights (or, in tests, a deterministic stub).
 */

export type VisionBackbone = "B32" | "B16" | "L14";

/** Shared vision-language embedding width per backbone. */
export const BACKBONE_DIM: Record<VisionBackbone, number> = {
  B32: 512,
  B16: 512,
  L14: 768,
};

export interface ImageInput {
  /** record id in the exported store */
  id: string;
  /** path to an image file, or raw image bytes */
  source: string | Uint8Array;
  /** optional group id (video id for frame records) */
  group?: string;
  /** optional class label */
  label?: number;
}

export interface BridgeConfig {
  visionBackbone: VisionBackbone;
  llmEncoderId: string;
  /** conditioning text prepended when exporting alignment targets */
  instruction: string;
  batchSize: number;
  /** images are resized to imageSize x imageSize before encoding */
  imageSize: number;
  /** permit an empty instruction (the task-unrelated-text ablation) */
  allowEmptyInstruction: boolean;
}

export const DEFAULT_INSTRUCTION =
  "Please play the role of a facial action describer. Objectively " +
  "describe the detailed facial actions of the person in the image.";

export function defaultConfig(
  overrides: Partial<BridgeConfig> = {},
): BridgeConfig {
  return {
    visionBackbone: "B32",
    llmEncoderId: "stub-llm-encoder",
    instruction: DEFAULT_INSTRUCTION,
    batchSize: 16,
    imageSize: 224,
    allowEmptyInstruction: false,
    ...overrides,
  };
}

export class BridgeConfigError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "BridgeConfigError";
  }
}

export function validateConfig(config: BridgeConfig): void {
  if (!(config.visionBackbone in BACKBONE_DIM)) {
    throw new BridgeConfigError(
      `unknown vision backbone ${JSON.stringify(config.visionBackbone)}`,
    );
  }
  if (config.batchSize <= 0 || config.imageSize <= 0) {
    throw new BridgeConfigError("batch size and image size must be positive");
  }
  if (config.instruction === "" && !config.allowEmptyInstruction) {
    throw new BridgeConfigError(
      "instruction is empty; pass allowEmptyInstruction for the " +
        "empty-text ablation",
    );
  }
}

export interface Encoder {
  /** identifier recorded in exported metadata, e.g. "clip-vit-base-patch32" */
  readonly backboneId: string;
  /** width of image/text embeddings (the shared space) */
  readonly visionDim: number;
  /** width of the alignment-target embeddings */
  readonly targetDim: number;
  encodeImage(image: ImageInput): Promise<Float32Array>;
  encodeText(text: string): Promise<Float32Array>;
  /** instruction-conditioned target embedding for one image */
  encodeTarget(image: ImageInput, instruction: string): Promise<Float32Array>;
}
