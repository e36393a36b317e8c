"""Identifier tokenization and word-level similarity.

Attribute values coming out of a GUI snapshot are short identifier-like
strings ("et_new_task_name", "userToDoEditText", "Get started"). They are
split into lowercase word tokens, expanded through a small abbreviation
table, and compared through word embeddings loaded from a text file in
the classic word2vec format.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError
from . import kernels

TokenList = list[str]

# ---------------------------------------------------------------------------
# tokenization
# ---------------------------------------------------------------------------

# boundaries: separator runs, lower->Upper, acronym->TitleCase, letter<->digit
_CAMEL_RE = re.compile(
    r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])|(?<=[A-Za-z])(?=[0-9])|(?<=[0-9])(?=[A-Za-z])"
)
_SEPARATOR_RE = re.compile(r"[^0-9A-Za-z]+")


@dataclass(frozen=True)
class AbbreviationMap:
    """Rewrite rules applied to raw fragments after splitting.

    expansions: short form -> replacement words ("et" becomes "edit text").
    merges: adjacent fragment pair -> single word; camel-cased compounds
    such as "ToDo" split into fragments that only make sense glued back
    together ("to" + "do" -> "todo").
    """

    expansions: dict[str, tuple[str, ...]] = field(default_factory=dict)
    merges: dict[tuple[str, str], str] = field(default_factory=dict)


DEFAULT_ABBREVIATIONS = AbbreviationMap(
    expansions={
        "et": ("edit", "text"),
        "btn": ("button",),
        "fab": ("floating", "action", "button"),
        "tv": ("text", "view"),
        "img": ("image",),
        "txt": ("text",),
    },
    merges={("to", "do"): "todo"},
)


def tokenize(raw: str, abbrevs: AbbreviationMap = DEFAULT_ABBREVIATIONS) -> TokenList:
    """Split an attribute value into lowercase word tokens.

    Splits on separator characters and camelCase boundaries, lowercases,
    drops purely numeric fragments, merges known fragment pairs and
    expands known abbreviations. Token order follows the input.
    """
    fragments: list[str] = []
    for chunk in _SEPARATOR_RE.split(raw):
        if not chunk:
            continue
        for frag in _CAMEL_RE.split(chunk):
            low = frag.lower()
            if not low or low.isdigit():
                continue
            fragments.append(low)

    merged: list[str] = []
    i = 0
    while i < len(fragments):
        if i + 1 < len(fragments) and (fragments[i], fragments[i + 1]) in abbrevs.merges:
            merged.append(abbrevs.merges[(fragments[i], fragments[i + 1])])
            i += 2
        else:
            merged.append(fragments[i])
            i += 1

    tokens: list[str] = []
    for frag in merged:
        tokens.extend(abbrevs.expansions.get(frag, (frag,)))
    return tokens


# ---------------------------------------------------------------------------
# embeddings
# ---------------------------------------------------------------------------


class EmbeddingTable:
    """Word vectors plus the interning state used by the numeric kernels.

    Every distinct token string seen through this table gets a stable
    integer id; in-vocabulary tokens additionally map to a row of the
    unit-normalized matrix handed to the kernels.
    """

    def __init__(self, dimension: int, vectors: dict[str, np.ndarray]):
        if dimension <= 0:
            raise ValidationError("dimension: must be positive")
        violations = []
        for word, vec in vectors.items():
            if vec.shape != (dimension,):
                violations.append(f"vectors[{word!r}]: expected {dimension} components")
            elif not np.isfinite(vec).all():
                violations.append(f"vectors[{word!r}]: non-finite component")
            elif float(np.linalg.norm(vec)) == 0.0:
                violations.append(f"vectors[{word!r}]: zero vector")
        if violations:
            raise ValidationError(violations)
        self.dimension = dimension
        self.vectors = {w: np.asarray(v, dtype=np.float64) for w, v in vectors.items()}

        self._unit = np.zeros((max(len(vectors), 1), dimension), dtype=np.float64)
        self._row_of: dict[str, int] = {}
        for row, (word, vec) in enumerate(self.vectors.items()):
            self._unit[row] = vec / np.linalg.norm(vec)
            self._row_of[word] = row
        self._token_ids: dict[str, int] = {}
        self._intern_cache: dict[tuple[str, ...], tuple[np.ndarray, np.ndarray]] = {}

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def _token_id(self, token: str) -> int:
        tid = self._token_ids.get(token)
        if tid is None:
            tid = len(self._token_ids)
            self._token_ids[token] = tid
        return tid

    def intern(self, tokens: TokenList) -> tuple[np.ndarray, np.ndarray]:
        """Map a token list to (ids, rows) arrays for the kernels."""
        key = tuple(tokens)
        cached = self._intern_cache.get(key)
        if cached is not None:
            return cached
        ids = np.fromiter((self._token_id(t) for t in tokens), dtype=np.int64, count=len(tokens))
        rows = np.fromiter(
            (self._row_of.get(t, -1) for t in tokens), dtype=np.int64, count=len(tokens)
        )
        self._intern_cache[key] = (ids, rows)
        return ids, rows

    @property
    def unit_matrix(self) -> np.ndarray:
        return self._unit


def load_embeddings(path: str) -> EmbeddingTable:
    """Read a word2vec text file: "count dim" header, then one word per line."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"{path}:1: expected 'vocab_size dimension' header")
    try:
        count, dimension = int(header[0]), int(header[1])
    except ValueError as exc:
        raise ParseError(f"{path}:1: non-integer header field") from exc

    vectors: dict[str, np.ndarray] = {}
    violations: list[str] = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != dimension + 1:
            violations.append(f"line {lineno}: expected word plus {dimension} components")
            continue
        word = parts[0]
        if word in vectors:
            violations.append(f"line {lineno}: duplicate word {word!r}")
            continue
        try:
            vectors[word] = np.array([float(x) for x in parts[1:]], dtype=np.float64)
        except ValueError:
            violations.append(f"line {lineno}: non-numeric component")
    if len(vectors) != count:
        violations.append(f"header: declared {count} words, found {len(vectors)}")
    if violations:
        raise ValidationError([f"{path}: {v}" for v in violations])
    return EmbeddingTable(dimension, vectors)


# ---------------------------------------------------------------------------
# similarity
# ---------------------------------------------------------------------------


def word_similarity(w: str, w2: str, table: EmbeddingTable) -> float:
    """Cosine of the word vectors; identical words score 1.0 even out of
    vocabulary, and differing words score 0.0 when either side is missing."""
    if w == w2:
        return 1.0
    va = table.vectors.get(w)
    vb = table.vectors.get(w2)
    if va is None or vb is None:
        return 0.0
    denom = math.sqrt(float(va @ va)) * math.sqrt(float(vb @ vb))
    return float(va @ vb) / denom


def attribute_similarity(a: TokenList, a2: TokenList, table: EmbeddingTable) -> float:
    """Directed similarity of token list ``a`` to ``a2``.

    For each token of ``a`` take its best word-level match within ``a2``,
    then average over the tokens of ``a``. Empty ``a`` scores 0.0, as does
    a non-empty ``a`` against an empty ``a2``.
    """
    if not a or not a2:
        return 0.0
    ids_a, rows_a = table.intern(a)
    ids_b, rows_b = table.intern(a2)
    return float(kernels.best_match_mean(ids_a, rows_a, ids_b, rows_b, table.unit_matrix))
