"""Within- and across-speaker ABX task construction, scoring, aggregation.

A cell is the smallest scoring unit: one unordered category pair, one
triphone context, one speaker (within) or one ordered speaker pair
(across).  Cell scores are pure functions of the archive, so they can
be computed in parallel; everything that follows the per-cell stage is
a sequential fold over sorted keys, which makes reports bit-identical
regardless of worker count.

Scoring counts strict wins and exact ties as integers and divides once
at the end, so the comparison order inside a cell cannot perturb eta.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .af_tables import AfTable
from .corpus import FeatureArchive, ItemSegment, segment_frames
from .distance import DEFAULT_DTW, DtwConfig, dtw_dissimilarity
from .errors import EmptyTaskError, UsageError

TASK_KINDS = ("phone", "af")
MODES = ("within", "across")


@dataclass(frozen=True)
class CellLimits:
    """Optional cap on across-speaker combinatorics.

    When max_speaker_pairs_per_context is set, the ordered speaker pairs
    of each (category pair, context) group are subsampled with a seeded
    shuffle; the seed lands in report metadata.
    """

    max_speaker_pairs_per_context: int | None = None
    seed: int = 42

    def __post_init__(self):
        cap = self.max_speaker_pairs_per_context
        if cap is not None and cap < 1:
            raise UsageError(f"max_speaker_pairs_per_context must be >= 1, got {cap}")


@dataclass(frozen=True)
class TaskCell:
    kind: str
    category_x: str
    category_y: str
    context: tuple[str, str]
    speaker_ab: str
    speaker_x: str
    set_x_ab: tuple[ItemSegment, ...]
    set_y_ab: tuple[ItemSegment, ...]
    set_x_x: tuple[ItemSegment, ...]
    set_y_x: tuple[ItemSegment, ...]

    @property
    def within(self) -> bool:
        return self.speaker_ab == self.speaker_x

    def key(self):
        return (self.category_x, self.category_y, self.context, self.speaker_ab, self.speaker_x)


@dataclass(frozen=True)
class CellScore:
    kind: str
    category_x: str
    category_y: str
    context: tuple[str, str]
    speaker_ab: str
    speaker_x: str
    eta_xy: float
    eta_yx: float
    epsilon: float
    n_comparisons: int

    def key(self):
        return (self.category_x, self.category_y, self.context, self.speaker_ab, self.speaker_x)


@dataclass
class AbxReport:
    kind: str
    condition: str
    pairwise: dict
    context_rates: dict
    overall: float
    per_cell: list
    metadata: dict = field(default_factory=dict)

    def category_rates(self) -> dict:
        """Per-category mean of incident pairwise rates, full precision."""
        cats = sorted({c for pair in self.pairwise for c in pair})
        out = {}
        for cat in cats:
            incident = [r for (x, y), r in sorted(self.pairwise.items()) if cat in (x, y)]
            out[cat] = sum(incident) / len(incident)
        return out

    def to_json_dict(self, include_per_cell: bool = False) -> dict:
        nested: dict[str, dict[str, str]] = {}
        for (x, y), rate in self.pairwise.items():
            nested.setdefault(x, {})[y] = f"{rate:.6f}"
        doc = {
            "task": self.kind,
            "condition": self.condition,
            "overall": f"{self.overall:.6f}",
            "pairwise": nested,
            "categories": {c: f"{r:.6f}" for c, r in self.category_rates().items()},
            "metadata": self.metadata,
        }
        if include_per_cell:
            doc["per_cell"] = [
                {
                    "category_x": c.category_x,
                    "category_y": c.category_y,
                    "context": list(c.context),
                    "speaker_ab": c.speaker_ab,
                    "speaker_x": c.speaker_x,
                    "eta_xy": f"{c.eta_xy:.6f}",
                    "eta_yx": f"{c.eta_yx:.6f}",
                    "epsilon": f"{c.epsilon:.6f}",
                    "n_comparisons": c.n_comparisons,
                }
                for c in self.per_cell
            ]
        return doc

    def to_json_bytes(self, include_per_cell: bool = False) -> bytes:
        text = json.dumps(self.to_json_dict(include_per_cell), indent=2, sort_keys=True)
        return (text + "\n").encode()

    def to_csv_bytes(self) -> bytes:
        """Context-level rows at full float precision, for re-aggregation."""
        lines = ["category_x,category_y,context_prev,context_next,condition,rate"]
        for (x, y, ctx) in sorted(self.context_rates):
            rate = self.context_rates[(x, y, ctx)]
            lines.append(f"{x},{y},{ctx[0]},{ctx[1]},{self.condition},{rate!r}")
        return ("\n".join(lines) + "\n").encode()


# ---------------------------------------------------------------------------
# cell construction


def _categorize(segments, kind, af_table):
    """Pairs (category, segment); af-excluded segments are dropped."""
    if kind == "phone":
        return [(s.phone, s) for s in segments]
    af_table.check_phones({s.phone for s in segments})
    out = []
    for s in segments:
        cat = af_table.classify(s.phone)
        if cat is not None:
            out.append((cat, s))
    return out


def _build_cells(segments, mode, kind, af_table, limits):
    if mode not in MODES:
        raise UsageError(f"mode must be one of {MODES}, got {mode!r}")
    if kind not in TASK_KINDS:
        raise UsageError(f"task kind must be one of {TASK_KINDS}, got {kind!r}")
    if (kind == "af") != (af_table is not None):
        raise UsageError("af_table is required for the af task and only for it")

    by_ctx: dict[tuple, dict[str, dict[str, list]]] = {}
    for cat, seg in _categorize(segments, kind, af_table):
        by_ctx.setdefault(seg.context, {}).setdefault(seg.speaker, {}).setdefault(
            cat, []
        ).append(seg)

    cells = []
    stats = {"undersized": 0, "capped_speaker_pairs": 0}
    rng = np.random.default_rng(limits.seed)

    for ctx in sorted(by_ctx):
        speakers = by_ctx[ctx]
        if mode == "within":
            for spk in sorted(speakers):
                cats = speakers[spk]
                for x, y in _sorted_pairs(cats):
                    sx, sy = cats[x], cats[y]
                    if len(sx) < 2 or len(sy) < 2:
                        stats["undersized"] += 1
                        continue
                    sx = tuple(sorted(sx))
                    sy = tuple(sorted(sy))
                    cells.append(
                        TaskCell(kind, x, y, ctx, spk, spk, sx, sy, sx, sy)
                    )
        else:
            all_cats = sorted({c for spk in speakers.values() for c in spk})
            for x, y in _sorted_pairs({c: None for c in all_cats}):
                valid = []
                for s_ab in sorted(speakers):
                    if x not in speakers[s_ab] or y not in speakers[s_ab]:
                        continue
                    for s_x in sorted(speakers):
                        if s_x == s_ab:
                            continue
                        if x not in speakers[s_x] or y not in speakers[s_x]:
                            stats["undersized"] += 1
                            continue
                        valid.append((s_ab, s_x))
                cap = limits.max_speaker_pairs_per_context
                if cap is not None and len(valid) > cap:
                    stats["capped_speaker_pairs"] += len(valid) - cap
                    idx = rng.permutation(len(valid))[:cap]
                    valid = sorted(valid[i] for i in idx)
                for s_ab, s_x in valid:
                    cells.append(
                        TaskCell(
                            kind, x, y, ctx, s_ab, s_x,
                            tuple(sorted(speakers[s_ab][x])),
                            tuple(sorted(speakers[s_ab][y])),
                            tuple(sorted(speakers[s_x][x])),
                            tuple(sorted(speakers[s_x][y])),
                        )
                    )
    cells.sort(key=TaskCell.key)
    return cells, stats


def _sorted_pairs(cats: dict):
    keys = sorted(cats)
    for i, x in enumerate(keys):
        for y in keys[i + 1:]:
            yield x, y


def build_cells(segments, mode, kind, af_table: AfTable | None = None,
                limits: CellLimits = CellLimits()) -> list[TaskCell]:
    cells, _ = _build_cells(segments, mode, kind, af_table, limits)
    return cells


# ---------------------------------------------------------------------------
# scoring


def _make_distance(archive, cfg, memo):
    frames_cache: dict[ItemSegment, np.ndarray] = {}

    def frames(seg):
        m = frames_cache.get(seg)
        if m is None:
            m = segment_frames(seg, archive)
            frames_cache[seg] = m
        return m

    def d(a, b):
        key = (a, b)
        v = memo.get(key)
        if v is None:
            v = dtw_dissimilarity(frames(a), frames(b), cfg)
            memo[key] = v
        return v

    return d


def asymmetric_score(set_x_ab, set_y_ab, set_x_X, archive: FeatureArchive,
                     cfg: DtwConfig = DEFAULT_DTW, memo: dict | None = None) -> float:
    """One direction of the ABX error rate.

    Within mode (X drawn from set_x_ab itself, A excluded by position)
    is detected by set identity; across mode draws X from a different
    speaker's set with no exclusion.  A strict d(A,X) > d(B,X) counts 1,
    an exact 64-bit tie counts 1/2; the total is divided once, so the
    result does not depend on enumeration order.
    """
    set_x_ab = tuple(set_x_ab)
    set_y_ab = tuple(set_y_ab)
    set_x_X = tuple(set_x_X)
    if not set_x_ab or not set_y_ab or not set_x_X:
        raise UsageError("all segment sets must be non-empty")
    within = set_x_X == set_x_ab
    if within and len(set_x_ab) < 2:
        raise UsageError("within mode needs at least 2 segments in the X category")
    d = _make_distance(archive, cfg, {} if memo is None else memo)

    gt = 0
    eq = 0
    if within:
        for ia, a in enumerate(set_x_ab):
            for ix, x in enumerate(set_x_ab):
                if ix == ia:
                    continue
                dax = d(a, x)
                for b in set_y_ab:
                    dbx = d(b, x)
                    if dax > dbx:
                        gt += 1
                    elif dax == dbx:
                        eq += 1
        total = len(set_x_ab) * (len(set_x_ab) - 1) * len(set_y_ab)
    else:
        for a in set_x_ab:
            for x in set_x_X:
                dax = d(a, x)
                for b in set_y_ab:
                    dbx = d(b, x)
                    if dax > dbx:
                        gt += 1
                    elif dax == dbx:
                        eq += 1
        total = len(set_x_ab) * len(set_y_ab) * len(set_x_X)
    return (2 * gt + eq) / (2 * total)


def _cell_comparisons(cell: TaskCell) -> int:
    nx, ny = len(cell.set_x_ab), len(cell.set_y_ab)
    if cell.within:
        return nx * (nx - 1) * ny + ny * (ny - 1) * nx
    return nx * ny * len(cell.set_x_x) + ny * nx * len(cell.set_y_x)


def pairwise_score(cell: TaskCell, archive: FeatureArchive,
                   cfg: DtwConfig = DEFAULT_DTW) -> CellScore:
    """epsilon = (eta(x->y) + eta(y->x)) / 2 for one cell.

    DTW dissimilarities are memoized per ordered segment pair for the
    duration of the cell, shared between the two directions.
    """
    memo: dict = {}
    eta_xy = asymmetric_score(cell.set_x_ab, cell.set_y_ab, cell.set_x_x, archive, cfg, memo)
    eta_yx = asymmetric_score(cell.set_y_ab, cell.set_x_ab, cell.set_y_x, archive, cfg, memo)
    return CellScore(
        cell.kind, cell.category_x, cell.category_y, cell.context,
        cell.speaker_ab, cell.speaker_x,
        eta_xy, eta_yx, (eta_xy + eta_yx) / 2.0, _cell_comparisons(cell),
    )


# ---------------------------------------------------------------------------
# aggregation


def aggregate(per_cell, kind: str, condition: str, metadata: dict | None = None) -> AbxReport:
    """Three-level unweighted mean: speakers, then contexts, then pairs.

    Every fold runs in sorted key order so the float result is a pure
    function of the score multiset.
    """
    per_cell = sorted(per_cell, key=CellScore.key)
    if not per_cell:
        raise EmptyTaskError("no cell scores to aggregate")
    ctx_groups: dict[tuple, list[CellScore]] = {}
    for cs in per_cell:
        ctx_groups.setdefault((cs.category_x, cs.category_y, cs.context), []).append(cs)
    context_rates = {}
    for key in sorted(ctx_groups):
        scores = ctx_groups[key]
        context_rates[key] = sum(c.epsilon for c in scores) / len(scores)

    pair_groups: dict[tuple, list[float]] = {}
    for (x, y, ctx) in sorted(context_rates):
        pair_groups.setdefault((x, y), []).append(context_rates[(x, y, ctx)])
    pairwise = {}
    for pair in sorted(pair_groups):
        rates = pair_groups[pair]
        pairwise[pair] = sum(rates) / len(rates)

    overall = sum(pairwise[p] for p in sorted(pairwise)) / len(pairwise)
    return AbxReport(kind, condition, pairwise, context_rates, overall,
                     per_cell, metadata or {})


# ---------------------------------------------------------------------------
# end-to-end driver

_WORKER_STATE = None


def _worker_init(archive, cfg):
    global _WORKER_STATE
    _WORKER_STATE = (archive, cfg)


def _worker_score(cell):
    archive, cfg = _WORKER_STATE
    return pairwise_score(cell, archive, cfg)


def config_digest(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def score_corpus(archive: FeatureArchive, segments, mode: str, kind: str,
                 af_table: AfTable | None = None, cfg: DtwConfig = DEFAULT_DTW,
                 limits: CellLimits = CellLimits(), jobs: int = 1) -> AbxReport:
    """build_cells -> pairwise_score (parallel) -> aggregate.

    The report is bit-identical for any jobs value: cells are scored
    independently and folded in sorted order.
    """
    if jobs < 1:
        raise UsageError(f"jobs must be >= 1, got {jobs}")
    cells, stats = _build_cells(segments, mode, kind, af_table, limits)
    if not cells:
        raise EmptyTaskError(
            f"no scoreable cells (undersized candidates: {stats['undersized']})"
        )
    if jobs == 1 or len(cells) == 1:
        scores = [pairwise_score(c, archive, cfg) for c in cells]
    else:
        chunk = max(1, len(cells) // (jobs * 4))
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_worker_init, initargs=(archive, cfg)
        ) as pool:
            scores = list(pool.map(_worker_score, cells, chunksize=chunk))
    metadata = {
        "task": kind,
        "condition": mode,
        "cells": len(cells),
        "comparisons": sum(s.n_comparisons for s in scores),
        "skipped_undersized": stats["undersized"],
        "capped_speaker_pairs": stats["capped_speaker_pairs"],
        "speaker_pairs": "ordered",
        "seed": limits.seed,
        "config_sha256": config_digest(
            {
                "task": kind,
                "condition": mode,
                "zero_vector_distance": cfg.zero_vector_distance,
                "max_speaker_pairs_per_context": limits.max_speaker_pairs_per_context,
                "seed": limits.seed,
                "af_table": af_table.feature_name if af_table else None,
            }
        ),
    }
    return aggregate(scores, kind, mode, metadata)
