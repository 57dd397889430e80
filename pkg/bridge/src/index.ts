export * from "./emb1.js";
export * from "./encoder.js";
export * from "./export.js";
export { StubEncoder } from "./stub.js";
export { TransformersEncoder } from "./transformers.js";
