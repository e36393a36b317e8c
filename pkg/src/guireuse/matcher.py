"""Widget-level similarity and candidate ranking.

A source widget is compared to a target widget attribute by attribute:
each non-empty source attribute is tokenized and scored against the
same-named target attribute, weighted, and the weighted terms are
averaged over the number of non-empty source attributes. Missing target
attributes contribute zero, so the score is directional by design.
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexicon import AbbreviationMap, DEFAULT_ABBREVIATIONS, EmbeddingTable, attribute_similarity, tokenize
from .model import ATTRIBUTE_NAMES, AppModel, Screen, Widget

DEFAULT_K = 5
DEFAULT_THRESHOLD = 0.4

Weights = dict[str, float]


@dataclass(frozen=True)
class Candidate:
    """A target widget scored against one source widget."""

    widget: Widget
    screen_id: str
    activity: str
    score: float


def widget_similarity(
    source: Widget,
    target: Widget,
    table: EmbeddingTable,
    weights: Weights | None = None,
    normalized: bool = False,
    abbrevs: AbbreviationMap = DEFAULT_ABBREVIATIONS,
) -> float:
    """Directional similarity of a source widget snapshot to a target widget.

    With ``normalized`` set, the weighted sum is divided by the total weight
    of the source's non-empty attributes instead of their count.
    """
    if not source.attributes:
        return 0.0
    total = 0.0
    weight_sum = 0.0
    for name, value in source.attributes:
        wg = 1.0 if weights is None else weights.get(name, 1.0)
        weight_sum += wg
        target_value = target.get(name)
        if not target_value:
            continue
        term = attribute_similarity(tokenize(value, abbrevs), tokenize(target_value, abbrevs), table)
        total += term * wg
    denominator = weight_sum if normalized else float(len(source.attributes))
    if denominator == 0.0:
        return 0.0
    return total / denominator


def rank_candidates(
    source: Widget,
    screen: Screen,
    table: EmbeddingTable,
    weights: Weights | None = None,
    k: int = DEFAULT_K,
    threshold: float = DEFAULT_THRESHOLD,
    normalized: bool = False,
    abbrevs: AbbreviationMap = DEFAULT_ABBREVIATIONS,
) -> list[Candidate]:
    """Score every widget on one screen, filter, sort, truncate.

    Candidates scoring below ``threshold`` are dropped; the rest are sorted
    by descending score with ties kept in on-screen document order, and at
    most ``k`` survive.
    """
    scored = [
        Candidate(
            widget=w,
            screen_id=screen.screen_id,
            activity=screen.activity,
            score=widget_similarity(source, w, table, weights, normalized, abbrevs),
        )
        for w in screen.widgets
    ]
    kept = [c for c in scored if c.score >= threshold]
    kept.sort(key=lambda c: -c.score)
    return kept[:k]


def rank_model_candidates(
    source: Widget,
    model: AppModel,
    table: EmbeddingTable,
    weights: Weights | None = None,
    k: int = DEFAULT_K,
    threshold: float = DEFAULT_THRESHOLD,
    normalized: bool = False,
    abbrevs: AbbreviationMap = DEFAULT_ABBREVIATIONS,
) -> list[Candidate]:
    """Merge per-screen rankings across the whole model.

    The same widget_id often appears on several screens of one activity;
    only the best-scoring occurrence is kept (earliest screen on ties).
    Ordering and truncation follow rank_candidates.
    """
    best: dict[tuple[str, str], Candidate] = {}
    order: list[tuple[str, str]] = []
    for screen in model.screens:
        for c in rank_candidates(source, screen, table, weights, len(screen.widgets), threshold, normalized, abbrevs):
            key = (c.widget.widget_id, c.activity)
            if key not in best:
                best[key] = c
                order.append(key)
            elif c.score > best[key].score:
                best[key] = c
    merged = [best[key] for key in order]
    merged.sort(key=lambda c: -c.score)
    return merged[:k]


def default_weights() -> Weights:
    return {name: 1.0 for name in ATTRIBUTE_NAMES}
