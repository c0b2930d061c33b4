"""Deterministic synthetic corpora with controllable separability.

Each (phone, context, speaker) cell gets a fixed number of segments
whose frames are phone_mean + speaker_bias + noise.  With zero noise
and zero speaker offset the corpus is perfectly separable and every ABX
metric has a known analytic value, which makes these corpora the oracle
inputs for the scoring pipeline.

All randomness comes from one seeded generator consumed in a fixed
construction order, so a config+seed pair pins the corpus byte for
byte.  Noise is drawn even when its scale is zero, which keeps segment
lengths aligned across a noise sweep at constant seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import (
    FeatureArchive,
    FrameLabelTrack,
    ItemSegment,
    write_feature_archive,
    write_item_file,
    write_label_track,
)
from .errors import UsageError


@dataclass(frozen=True)
class SynthConfig:
    phones: tuple = ("AE", "EH", "IY")
    dim: int = 8
    n_speakers: int = 2
    speaker_offset_scale: float = 0.0
    noise_scale: float = 0.0
    segments_per_cell: int = 3
    frames_per_segment: tuple = (4, 8)
    contexts: tuple = (("S", "T"), ("K", "N"))
    frame_period: int = 10000
    seed: int = 0
    mean_scale: float = 1.0
    means: dict | None = None

    def __post_init__(self):
        if len(self.phones) < 1:
            raise UsageError("need at least 1 phone")
        if len(set(self.phones)) != len(self.phones):
            raise UsageError("duplicate phone symbols")
        if self.n_speakers < 1:
            raise UsageError("need at least 1 speaker")
        if self.dim < 1:
            raise UsageError("dim must be >= 1")
        if self.means is None and self.dim < len(self.phones):
            raise UsageError(
                f"one-hot means need dim >= n_phones, got dim={self.dim} "
                f"for {len(self.phones)} phones"
            )
        if self.speaker_offset_scale < 0 or self.noise_scale < 0:
            raise UsageError("scales must be >= 0")
        if self.segments_per_cell < 1:
            raise UsageError("segments_per_cell must be >= 1")
        lo, hi = self.frames_per_segment
        if not (1 <= lo <= hi):
            raise UsageError(f"bad frames_per_segment range {self.frames_per_segment}")
        if len(self.contexts) < 1:
            raise UsageError("need at least 1 context")
        if self.frame_period < 1:
            raise UsageError("frame_period must be >= 1 microsecond")
        if self.means is not None:
            for p in self.phones:
                if p not in self.means:
                    raise UsageError(f"no mean vector for phone {p}")
                if len(self.means[p]) != self.dim:
                    raise UsageError(f"mean vector for {p} has wrong dimension")

    def to_dict(self) -> dict:
        return {
            "phones": list(self.phones),
            "dim": self.dim,
            "n_speakers": self.n_speakers,
            "speaker_offset_scale": self.speaker_offset_scale,
            "noise_scale": self.noise_scale,
            "segments_per_cell": self.segments_per_cell,
            "frames_per_segment": list(self.frames_per_segment),
            "contexts": [list(c) for c in self.contexts],
            "frame_period": self.frame_period,
            "seed": self.seed,
            "mean_scale": self.mean_scale,
            "means": {p: list(map(float, v)) for p, v in self.means.items()}
            if self.means
            else None,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthConfig":
        known = {
            "phones", "dim", "n_speakers", "speaker_offset_scale", "noise_scale",
            "segments_per_cell", "frames_per_segment", "contexts", "frame_period",
            "seed", "mean_scale", "means",
        }
        unknown = set(doc) - known
        if unknown:
            raise UsageError(f"unknown synth config keys: {sorted(unknown)}")
        kw = dict(doc)
        if "phones" in kw:
            kw["phones"] = tuple(kw["phones"])
        if "frames_per_segment" in kw:
            kw["frames_per_segment"] = tuple(kw["frames_per_segment"])
        if "contexts" in kw:
            kw["contexts"] = tuple(tuple(c) for c in kw["contexts"])
        return cls(**kw)


@dataclass
class SynthCorpus:
    archive: FeatureArchive
    segments: list
    tracks: list
    config: SynthConfig = field(repr=False, default=None)


def _phone_means(cfg: SynthConfig) -> dict:
    if cfg.means is not None:
        return {p: np.asarray(cfg.means[p], dtype=np.float64) * cfg.mean_scale
                for p in cfg.phones}
    means = {}
    for i, p in enumerate(cfg.phones):
        v = np.zeros(cfg.dim)
        v[i] = cfg.mean_scale
        means[p] = v
    return means


def generate_corpus(cfg: SynthConfig) -> SynthCorpus:
    """One utterance per speaker, segments packed back to back."""
    rng = np.random.default_rng(cfg.seed)
    means = _phone_means(cfg)
    speakers = [f"s{i + 1:02d}" for i in range(cfg.n_speakers)]

    biases = {}
    for spk in speakers:
        direction = rng.standard_normal(cfg.dim)
        norm = np.sqrt(np.einsum("i,i->", direction, direction))
        if norm > 0:
            direction = direction / norm
        biases[spk] = direction * cfg.speaker_offset_scale

    utterances = {}
    segments = []
    tracks = []
    lo, hi = cfg.frames_per_segment
    for i, spk in enumerate(speakers):
        utt = f"u{i + 1:02d}"
        chunks = []
        spans = []
        cursor = 0
        for prev, nxt in cfg.contexts:
            for phone in cfg.phones:
                for _ in range(cfg.segments_per_cell):
                    t = int(rng.integers(lo, hi + 1))
                    noise = rng.standard_normal((t, cfg.dim)) * cfg.noise_scale
                    chunks.append(means[phone] + biases[spk] + noise)
                    onset = cursor * cfg.frame_period / 1e6
                    offset = (cursor + t) * cfg.frame_period / 1e6
                    segments.append(
                        ItemSegment(utt, onset, offset, phone, prev, nxt, spk)
                    )
                    spans.append((onset, offset, phone))
                    cursor += t
        utterances[utt] = np.concatenate(chunks).astype(np.float32)
        tracks.append(FrameLabelTrack(utt, tuple(spans)))
    archive = FeatureArchive(utterances, cfg.frame_period)
    return SynthCorpus(archive, segments, tracks, cfg)


def write_corpus(corpus: SynthCorpus, out_dir) -> dict:
    """Write features/, items.item, labels.tsv and the synth.json sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_feature_archive(corpus.archive, out / "features", format="binary")
    write_item_file(corpus.segments, out / "items.item")
    write_label_track(corpus.tracks, out / "labels.tsv")
    sidecar = {
        "config": corpus.config.to_dict() if corpus.config else None,
        "generator": {"name": "PCG64", "numpy": np.__version__},
    }
    (out / "synth.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")
    return {
        "features": out / "features",
        "items": out / "items.item",
        "labels": out / "labels.tsv",
        "sidecar": out / "synth.json",
    }
