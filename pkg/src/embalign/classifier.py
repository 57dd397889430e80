"""Zero-shot prediction: class prototypes from prompt embeddings,
temporal pooling for frame sequences, and cosine-softmax scoring.

A prototype is a projected, L2-normalized prompt embedding; with
ensembling the normalized projected embeddings of a class are averaged
and renormalized.  Prediction projects the (pooled) sample, normalizes
it, and softmaxes the cosine similarities over temperature.  Ties in
the argmax break toward the lowest class index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DimensionError, NumericError
from .projection import ProjectionHead, project
from .store import EmbeddingStore

DEFAULT_TEMPLATE = "a photo of a face with an expression of {class name}."

# Preset templates; the first five form the small ensemble, all ten the
# large one.
PROMPT_TEMPLATES = [
    "{class name}.",
    "an expression of {class name}.",
    "a photo of a face exuding {class name}.",
    "a photo radiating {class name} in a person.",
    "a photo of a person embodying {class name}.",
    "a good photo capturing someone's {class name}.",
    "a photo showing someone immersed in {class name}.",
    "a photo capturing {class name} within an individual.",
    "a clean photo showcasing a person's {class name}.",
    DEFAULT_TEMPLATE,
]


def fill_template(template: str, class_name: str) -> str:
    if "{class name}" not in template:
        raise DataError(f"template {template!r} lacks the class placeholder")
    return template.replace("{class name}", class_name)


@dataclass
class PromptSet:
    """Class names x templates and their text embeddings, one record
    per (class, template) with id ``class:<k>/tpl:<j>``."""

    class_names: list[str]
    templates: list[str]
    text_embeddings: EmbeddingStore

    def validate(self):
        if len(self.class_names) < 2:
            raise DataError("a prompt set needs at least 2 classes")
        if not self.templates:
            raise DataError("a prompt set needs at least 1 template")
        by_id = self.text_embeddings.by_id()
        for k in range(len(self.class_names)):
            for j in range(len(self.templates)):
                key = f"class:{k}/tpl:{j}"
                if key not in by_id:
                    raise DataError(f"prompt embedding {key!r} missing")

    def embedding(self, k: int, j: int) -> np.ndarray:
        return self.text_embeddings.by_id()[f"class:{k}/tpl:{j}"].vector

    @classmethod
    def from_store(cls, store: EmbeddingStore) -> "PromptSet":
        names = store.metadata.get("class_names", "")
        templates = store.metadata.get("templates", "")
        if not names:
            raise DataError("store metadata lacks class_names")
        ps = cls(
            class_names=names.split(","),
            templates=templates.split("|") if templates else ["{class name}"],
            text_embeddings=store,
        )
        ps.validate()
        return ps


@dataclass
class ClassifierConfig:
    temperature: float = 0.01
    ensemble: str = "embed_mean"  # or "single"
    pooling: str = "none"  # or "temporal_mean"

    def validate(self):
        if self.temperature <= 0:
            raise NumericError("temperature must be positive", code="bad-tau")
        if self.ensemble not in ("single", "embed_mean"):
            raise DataError(f"unknown ensemble mode {self.ensemble!r}")
        if self.pooling not in ("none", "temporal_mean"):
            raise DataError(f"unknown pooling mode {self.pooling!r}")


@dataclass
class Prediction:
    probs: np.ndarray
    argmax: int
    similarity: np.ndarray


def _unit(v: np.ndarray, what: str) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise NumericError(f"zero-norm {what}; cosine undefined",
                           code="zero-norm")
    return v / norm


def build_class_prototypes(head: ProjectionHead, prompts: PromptSet,
                           config: ClassifierConfig) -> np.ndarray:
    """One unit prototype row per class, shape (U, out_dim)."""
    prompts.validate()
    config.validate()
    if prompts.text_embeddings.dim != head.in_dim:
        raise DimensionError(
            f"prompt embeddings have dim {prompts.text_embeddings.dim}, "
            f"head expects {head.in_dim}"
        )
    rows = []
    for k in range(len(prompts.class_names)):
        if config.ensemble == "single":
            rows.append(_unit(project(head, prompts.embedding(k, 0)),
                              f"projected prompt class {k}"))
        else:
            units = [
                _unit(project(head, prompts.embedding(k, j)),
                      f"projected prompt class {k} template {j}")
                for j in range(len(prompts.templates))
            ]
            if all(np.array_equal(u, units[0]) for u in units[1:]):
                # identical templates must reduce exactly to the
                # single-template prototype, not to within rounding
                rows.append(units[0])
            else:
                mean = np.mean(units, axis=0)
                rows.append(_unit(mean, f"ensembled prototype class {k}"))
    return np.stack(rows)


def pool_frames(frames) -> np.ndarray:
    """Componentwise mean of raw (pre-projection) frame embeddings."""
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    if not frames:
        raise DataError("cannot pool an empty frame list")
    dim = frames[0].shape
    for f in frames:
        if f.shape != dim:
            raise DimensionError(
                f"frame dims differ: {f.shape} vs {dim}"
            )
    return np.mean(frames, axis=0)


def _softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max()
    e = np.exp(shifted)
    return e / e.sum()


def predict(head: ProjectionHead, prototypes: np.ndarray, sample,
            config: ClassifierConfig | None = None) -> Prediction:
    """Score one sample (a vector, or a frame list when pooling is
    ``temporal_mean``) against the prototype rows."""
    config = config or ClassifierConfig()
    config.validate()
    prototypes = np.asarray(prototypes, dtype=np.float64)
    if prototypes.ndim != 2:
        raise DimensionError("prototypes must be a (classes x dim) matrix")
    if config.pooling == "temporal_mean" and not (
        isinstance(sample, np.ndarray) and sample.ndim == 1
    ):
        sample = pool_frames(list(sample))
    sample = np.asarray(sample, dtype=np.float64)
    phat = _unit(project(head, sample), "projected sample")
    proto_norms = np.linalg.norm(prototypes, axis=1)
    if np.any(proto_norms == 0.0):
        raise NumericError("zero-norm prototype", code="zero-norm")
    sims = (prototypes / proto_norms[:, None]) @ phat
    probs = _softmax(sims / config.temperature)
    return Prediction(probs=probs, argmax=int(np.argmax(probs)),
                      similarity=sims)


def predict_batch(head: ProjectionHead, prototypes: np.ndarray,
                  samples: EmbeddingStore,
                  config: ClassifierConfig | None = None
                  ) -> list[tuple[str, Prediction]]:
    """Per-sample predictions in store order.

    With ``temporal_mean`` pooling, records sharing a non-empty group
    id form one sample keyed by the group id; records with an empty
    group stand alone under their own id.
    """
    config = config or ClassifierConfig()
    config.validate()
    groups: dict[str, list[np.ndarray]] = {}
    order: list[str] = []
    for rec in samples.records:
        key = rec.group if (config.pooling == "temporal_mean" and rec.group) \
            else rec.id
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(rec.vector.astype(np.float64))
    out = []
    for key in order:
        frames = groups[key]
        sample = pool_frames(frames) if len(frames) > 1 or \
            config.pooling == "temporal_mean" else frames[0]
        pooled_config = ClassifierConfig(temperature=config.temperature,
                                         ensemble=config.ensemble,
                                         pooling="none")
        out.append((key, predict(head, prototypes, sample, pooled_config)))
    return out


def format_prediction_line(sample_id: str, pred: Prediction,
                           class_names: list[str]) -> str:
    probs = " ".join(f"{p:.9g}" for p in pred.probs)
    return f"{sample_id}\t{class_names[pred.argmax]}\t{probs}"


def write_predictions(path, results, class_names: list[str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("#classes\t" + ",".join(class_names) + "\n")
        for sample_id, pred in results:
            fh.write(format_prediction_line(sample_id, pred, class_names) + "\n")


def read_predictions(path) -> tuple[list[str], list[tuple[str, int, np.ndarray]]]:
    """Inverse of :func:`write_predictions`; returns
    (class_names, [(id, argmax index, probs)])."""
    class_names: list[str] = []
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#classes\t"):
                class_names = line.split("\t", 1)[1].split(",")
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"malformed prediction line: {line!r}")
            sample_id, name, probs = parts
            if name not in class_names:
                raise DataError(f"unknown class name {name!r} in predictions")
            rows.append((sample_id, class_names.index(name),
                         np.array([float(p) for p in probs.split()])))
    return class_names, rows
