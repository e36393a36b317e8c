"""Run configuration: defaults, TOML loading, validation."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError, ParseError
from .lexicon import AbbreviationMap, DEFAULT_ABBREVIATIONS
from .model import ATTRIBUTE_NAMES


@dataclass(frozen=True)
class MatcherConfig:
    k: int = 5
    threshold: float = 0.4
    weights: dict[str, float] = field(default_factory=dict)
    normalized: bool = False


@dataclass(frozen=True)
class ExplorerConfig:
    max_path_len: int = 4
    cache: bool = True


@dataclass(frozen=True)
class AdaptationConfig:
    weakest_fraction: float = 0.2
    retry_budget: int | None = None  # None: derived as k - 1


@dataclass(frozen=True)
class OracleConfig:
    threshold: float = 0.8


@dataclass(frozen=True)
class RunConfig:
    matcher: MatcherConfig = field(default_factory=MatcherConfig)
    explorer: ExplorerConfig = field(default_factory=ExplorerConfig)
    adaptation: AdaptationConfig = field(default_factory=AdaptationConfig)
    oracle: OracleConfig = field(default_factory=OracleConfig)
    abbrevs: AbbreviationMap = DEFAULT_ABBREVIATIONS
    embeddings: str | None = None
    # reserved: the pipeline is deterministic regardless; kept so configs
    # may state the expectation explicitly
    deterministic: bool = True

    @property
    def retry_budget(self) -> int:
        if self.adaptation.retry_budget is not None:
            return self.adaptation.retry_budget
        return max(self.matcher.k - 1, 0)

    @property
    def weights(self) -> dict[str, float] | None:
        return self.matcher.weights or None


def _check_extra(doc: dict, allowed: set[str], path: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"{path}: unknown keys {sorted(extra)}")


def _number(doc: dict, key: str, default: float, path: str, lo: float, hi: float) -> float:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(f"{path}.{key}: expected a finite number")
    if not (lo <= value <= hi):
        raise ConfigError(f"{path}.{key}: {value} outside [{lo}, {hi}]")
    return float(value)


def _integer(doc: dict, key: str, default: int, path: str, lo: int) -> int:
    value = doc.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}.{key}: expected an integer")
    if value < lo:
        raise ConfigError(f"{path}.{key}: must be >= {lo}")
    return value


def _boolean(doc: dict, key: str, default: bool, path: str) -> bool:
    value = doc.get(key, default)
    if not isinstance(value, bool):
        raise ConfigError(f"{path}.{key}: expected a boolean")
    return value


def config_from_dict(doc: dict, base_dir: str = ".") -> RunConfig:
    """Build a RunConfig from a parsed TOML document.

    Unknown keys are rejected with the offending path; relative embedding
    paths are resolved against ``base_dir``.
    """
    if not isinstance(doc, dict):
        raise ConfigError("$: expected a table")
    _check_extra(doc, {"matcher", "explorer", "adaptation", "oracle", "lexicon", "embeddings", "deterministic"}, "$")

    raw = doc.get("matcher", {})
    _check_extra(raw, {"k", "threshold", "weights", "normalized"}, "matcher")
    weights_raw = raw.get("weights", {})
    if not isinstance(weights_raw, dict):
        raise ConfigError("matcher.weights: expected a table")
    weights: dict[str, float] = {}
    for name, value in weights_raw.items():
        if name not in ATTRIBUTE_NAMES:
            raise ConfigError(f"matcher.weights.{name}: unknown attribute")
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value < 0:
            raise ConfigError(f"matcher.weights.{name}: expected a non-negative finite number")
        weights[name] = float(value)
    if weights and all(v == 0.0 for v in weights.values()) and set(weights) == set(ATTRIBUTE_NAMES):
        raise ConfigError("matcher.weights: all weights are zero")
    matcher = MatcherConfig(
        k=_integer(raw, "k", 5, "matcher", 1),
        threshold=_number(raw, "threshold", 0.4, "matcher", -1.0, 2.0),
        weights=weights,
        normalized=_boolean(raw, "normalized", False, "matcher"),
    )

    raw = doc.get("explorer", {})
    _check_extra(raw, {"max_path_len", "cache"}, "explorer")
    explorer = ExplorerConfig(
        max_path_len=_integer(raw, "max_path_len", 4, "explorer", 1),
        cache=_boolean(raw, "cache", True, "explorer"),
    )

    raw = doc.get("adaptation", {})
    _check_extra(raw, {"weakest_fraction", "retry_budget"}, "adaptation")
    budget = raw.get("retry_budget")
    if budget is not None:
        budget = _integer(raw, "retry_budget", 0, "adaptation", 0)
    fraction = _number(raw, "weakest_fraction", 0.2, "adaptation", 0.0, 1.0)
    if fraction == 0.0:
        raise ConfigError("adaptation.weakest_fraction: must be positive")
    adaptation = AdaptationConfig(weakest_fraction=fraction, retry_budget=budget)

    raw = doc.get("oracle", {})
    _check_extra(raw, {"threshold"}, "oracle")
    oracle = OracleConfig(threshold=_number(raw, "threshold", 0.8, "oracle", 0.0, 1.0))

    raw = doc.get("lexicon", {})
    _check_extra(raw, {"abbreviations"}, "lexicon")
    abbrevs = DEFAULT_ABBREVIATIONS
    if "abbreviations" in raw:
        table = raw["abbreviations"]
        if not isinstance(table, dict):
            raise ConfigError("lexicon.abbreviations: expected a table")
        expansions: dict[str, tuple[str, ...]] = {}
        for short, words in table.items():
            if not isinstance(words, list) or not all(isinstance(w, str) for w in words):
                raise ConfigError(f"lexicon.abbreviations.{short}: expected a list of strings")
            expansions[short.lower()] = tuple(w.lower() for w in words)
        abbrevs = AbbreviationMap(expansions=expansions, merges=DEFAULT_ABBREVIATIONS.merges)

    embeddings = doc.get("embeddings")
    if embeddings is not None:
        if not isinstance(embeddings, str):
            raise ConfigError("embeddings: expected a path string")
        if not os.path.isabs(embeddings):
            embeddings = os.path.normpath(os.path.join(base_dir, embeddings))

    return RunConfig(
        matcher=matcher,
        explorer=explorer,
        adaptation=adaptation,
        oracle=oracle,
        abbrevs=abbrevs,
        embeddings=embeddings,
        deterministic=_boolean(doc, "deterministic", True, "$"),
    )


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"{path}: invalid TOML: {exc}") from exc
    return config_from_dict(doc, base_dir=os.path.dirname(os.path.abspath(path)))


def with_cache(cfg: RunConfig, enabled: bool) -> RunConfig:
    return replace(cfg, explorer=replace(cfg.explorer, cache=enabled))
