/**
 * Real encoder backed by transformers.js ONNX models.
 *
 * Image/text embeddings come from a CLIP checkpoint matching the
 * configured backbone.  The alignment target for an image is built by
 * captioning it, prefixing the configured instruction, and mean-pooling
 * a text encoder's final-layer token states — the same pooling rule the
 * exported metadata declares.  Model downloads happen on first use; in
 * an offline environment construction fails with a clear error and
 * callers should fall back to the stub.
 */
import {
  BACKBONE_DIM,
  Encoder,
  ImageInput,
  VisionBackbone,
} from "./encoder.js";

const CLIP_MODELS: Record<VisionBackbone, string> = {
  B32: "Xenova/clip-vit-base-patch32",
  B16: "Xenova/clip-vit-base-patch16",
  L14: "Xenova/clip-vit-large-patch14",
};

const DEFAULT_CAPTIONER = "Xenova/vit-gpt2-image-captioning";
const DEFAULT_TEXT_ENCODER = "Xenova/all-MiniLM-L6-v2";

type Transformers = typeof import("@huggingface/transformers");

async function loadImage(tf: Transformers, image: ImageInput) {
  if (typeof image.source === "string") {
    return tf.RawImage.read(image.source);
  }
  const copy = Uint8Array.from(image.source);
  return tf.RawImage.fromBlob(new Blob([copy]));
}

export class TransformersEncoder implements Encoder {
  readonly backboneId: string;
  readonly visionDim: number;
  readonly targetDim: number;

  private constructor(
    backbone: VisionBackbone,
    targetDim: number,
    private tf: Transformers,
    private processor: any,
    private visionModel: any,
    private tokenizer: any,
    private textModel: any,
    private captioner: any,
    private targetEncoder: any,
  ) {
    this.backboneId = CLIP_MODELS[backbone];
    this.visionDim = BACKBONE_DIM[backbone];
    this.targetDim = targetDim;
  }

  static async create(
    backbone: VisionBackbone,
    llmEncoderId: string = DEFAULT_TEXT_ENCODER,
  ): Promise<TransformersEncoder> {
    const tf = await import("@huggingface/transformers");
    const model = CLIP_MODELS[backbone];
    const processor = await tf.AutoProcessor.from_pretrained(model, {});
    const visionModel =
      await tf.CLIPVisionModelWithProjection.from_pretrained(model);
    const tokenizer = await tf.AutoTokenizer.from_pretrained(model);
    const textModel =
      await tf.CLIPTextModelWithProjection.from_pretrained(model);
    const captioner = await tf.pipeline("image-to-text", DEFAULT_CAPTIONER);
    const targetEncoder = await tf.pipeline(
      "feature-extraction",
      llmEncoderId,
    );
    const probe = (await targetEncoder("probe", {
      pooling: "mean",
    })) as any;
    const targetDim = probe.dims[probe.dims.length - 1];
    return new TransformersEncoder(
      backbone, targetDim, tf, processor, visionModel, tokenizer, textModel,
      captioner, targetEncoder,
    );
  }

  async encodeImage(image: ImageInput): Promise<Float32Array> {
    const raw = await loadImage(this.tf, image);
    const inputs = await this.processor(raw);
    const { image_embeds } = await this.visionModel(inputs);
    return Float32Array.from(image_embeds.data as Float32Array);
  }

  async encodeText(text: string): Promise<Float32Array> {
    const inputs = this.tokenizer([text], { padding: true, truncation: true });
    const { text_embeds } = await this.textModel(inputs);
    return Float32Array.from(text_embeds.data as Float32Array);
  }

  async encodeTarget(
    image: ImageInput,
    instruction: string,
  ): Promise<Float32Array> {
    const raw = await loadImage(this.tf, image);
    const captions = (await this.captioner(raw)) as any[];
    const caption = captions[0]?.generated_text ?? "";
    const text = instruction ? `${instruction} ${caption}` : caption;
    const pooled = (await this.targetEncoder(text, {
      pooling: "mean",
    })) as any;
    return Float32Array.from(pooled.data as Float32Array);
  }
}
