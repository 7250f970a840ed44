"""Noise-elimination pipeline turning raw posts into clean token sequences.

Stage order: tokenize -> emoticon conversion -> hashtag splitting -> suffix
stemming -> cleaning.  Lowercasing happens in the cleaning stage so that
hashtag splitting can still see capital-letter boundaries.
"""

from __future__ import annotations

import importlib.resources
import re
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .errors import DataError

_PUNCT = frozenset(string.punctuation)

# Codepoint ranges treated as emoji (plus joiners/modifiers used inside
# multi-codepoint sequences).
_EMOJI_RANGES = (
    (0x1F000, 0x1FAFF),
    (0x2600, 0x27BF),
    (0x2B00, 0x2BFF),
    (0xFE0F, 0xFE0F),
    (0x200D, 0x200D),
)
_ZWJ = "‍"
_VARIATION_SELECTOR = "️"
_SKIN_TONES = frozenset(chr(cp) for cp in range(0x1F3FB, 0x1F400))

_HASHTAG_BODY = re.compile(r"\d+|[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+")
_HASHTAG_TOKEN = re.compile(r"#\w")

# Longest suffix first; stripping only applies when the remaining stem keeps
# at least _MIN_STEM characters.
_SUFFIXES = ("ing", "est", "ed", "s")
_MIN_STEM = 3
_CONSONANTS = frozenset("bcdfghjklmnpqrstvwxyz")

EmoticonMap = Mapping[str, tuple[str, ...]]


def _is_emoji_char(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _EMOJI_RANGES)


@dataclass(frozen=True)
class TokenSequence:
    """Ordered preprocessed tokens of one post."""

    tokens: tuple[str, ...]
    source_id: str = ""

    def __post_init__(self):
        for tok in self.tokens:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"invalid token {tok!r} in sequence {self.source_id!r}")

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True)
class PipelineConfig:
    """Stage toggles for the preprocessing pipeline."""

    convert_emoticons: bool = True
    split_hashtags: bool = True
    stem: bool = True
    clean: bool = True
    # Digits produced by hashtag splitting (and digits embedded in mixed
    # tokens) survive cleaning when set.
    keep_hashtag_digits: bool = False

    def to_dict(self) -> dict:
        return {
            "convert_emoticons": self.convert_emoticons,
            "split_hashtags": self.split_hashtags,
            "stem": self.stem,
            "clean": self.clean,
            "keep_hashtag_digits": self.keep_hashtag_digits,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PipelineConfig":
        return cls(**{k: bool(d[k]) for k in cls().to_dict() if k in d})


def load_emoticon_map(path: Optional[str | Path] = None) -> dict[str, tuple[str, ...]]:
    """Emoji -> description-token map from a TSV of hex codepoints and text."""
    if path is None:
        text = importlib.resources.files("misinfo.resources").joinpath("emoticons.tsv").read_text("utf-8")
        source = "<builtin emoticons.tsv>"
    else:
        p = Path(path)
        if not p.exists():
            raise DataError(f"emoticon map not found: {p}")
        text = p.read_text("utf-8")
        source = str(p)
    mapping: dict[str, tuple[str, ...]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise DataError(f"{source}:{lineno}: expected 2 tab-separated columns")
        try:
            key = "".join(chr(int(cp, 16)) for cp in parts[0].split())
        except ValueError as exc:
            raise DataError(f"{source}:{lineno}: bad codepoint field {parts[0]!r}") from exc
        desc = tuple(parts[1].split())
        if not key or not desc:
            raise DataError(f"{source}:{lineno}: empty key or description")
        mapping[key] = desc
    return mapping


_DEFAULT_EMOTICONS: Optional[dict[str, tuple[str, ...]]] = None


def default_emoticon_map() -> dict[str, tuple[str, ...]]:
    global _DEFAULT_EMOTICONS
    if _DEFAULT_EMOTICONS is None:
        _DEFAULT_EMOTICONS = load_emoticon_map()
    return _DEFAULT_EMOTICONS


def _split_emoji_units(run: str) -> list[str]:
    """Split a run of emoji codepoints into display units (base + modifiers,
    ZWJ sequences stay joined)."""
    units = []
    i = 0
    n = len(run)
    while i < n:
        j = i + 1
        while j < n:
            if run[j] == _VARIATION_SELECTOR or run[j] in _SKIN_TONES:
                j += 1
            elif run[j] == _ZWJ and j + 1 < n:
                j += 2  # joiner plus the next base character
            else:
                break
        units.append(run[i:j])
        i = j
    return units


def _split_chunk(chunk: str) -> list[str]:
    """Separate emoji units from text and peel leading/trailing punctuation."""
    segments: list[tuple[bool, str]] = []  # (is_emoji, payload)
    buf = []
    for ch in chunk:
        if _is_emoji_char(ch):
            if buf:
                segments.append((False, "".join(buf)))
                buf = []
            if segments and segments[-1][0]:
                segments[-1] = (True, segments[-1][1] + ch)
            else:
                segments.append((True, ch))
        else:
            buf.append(ch)
    if buf:
        segments.append((False, "".join(buf)))

    out: list[str] = []
    for is_emoji, payload in segments:
        if is_emoji:
            out.extend(_split_emoji_units(payload))
        else:
            out.extend(_peel_punctuation(payload))
    return out


def _peel_punctuation(part: str) -> list[str]:
    lead: list[str] = []
    while part and part[0] in _PUNCT and not _HASHTAG_TOKEN.match(part):
        lead.append(part[0])
        part = part[1:]
    trail: list[str] = []
    while part and part[-1] in _PUNCT:
        trail.append(part[-1])
        part = part[:-1]
    trail.reverse()
    return lead + ([part] if part else []) + trail


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization with punctuation peeling.

    Hashtag tokens keep their leading ``#`` for the hashtag stage, and emoji
    become standalone tokens.
    """
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_split_chunk(chunk))
    return tokens


def convert_emoticons(tokens: Sequence[str], mapping: Optional[EmoticonMap] = None) -> list[str]:
    """Replace mapped emoji tokens by their description tokens; unmapped emoji
    pass through for the cleaning stage to drop."""
    if mapping is None:
        mapping = default_emoticon_map()
    out: list[str] = []
    for tok in tokens:
        desc = mapping.get(tok)
        if desc is not None:
            out.extend(desc)
        else:
            out.append(tok)
    return out


def split_hashtag(token: str) -> list[str]:
    """Split ``#CamelCase123`` hashtags at capital-letter and digit boundaries."""
    if not token.startswith("#") or len(token) < 2:
        return [token]
    return _HASHTAG_BODY.findall(token[1:])


def stem(token: str) -> str:
    """Strip one inflectional suffix (ing/est/ed/s), longest match first.

    Stripping applies only when at least three characters remain; a doubled
    final consonant left by ``ing``/``ed`` removal is reduced when that also
    leaves at least three characters.
    """
    lower = token.lower()
    for suffix in _SUFFIXES:
        if lower.endswith(suffix) and len(token) - len(suffix) >= _MIN_STEM:
            stemmed = token[: len(token) - len(suffix)]
            if suffix in ("ing", "ed"):
                tail = stemmed.lower()
                if (
                    len(stemmed) - 1 >= _MIN_STEM
                    and tail[-1] == tail[-2]
                    and tail[-1] in _CONSONANTS
                ):
                    stemmed = stemmed[:-1]
            return stemmed
    return token


def clean(tokens: Sequence[str], keep_digits: bool = False) -> list[str]:
    """Drop punctuation/digit/non-ASCII noise and lowercase the survivors.

    Pure-punctuation tokens, pure-digit tokens (unless ``keep_digits``) and
    tokens containing non-ASCII codepoints are removed; punctuation and digit
    characters embedded in mixed tokens are stripped out.
    """
    out: list[str] = []
    for tok in tokens:
        if any(ord(ch) > 127 for ch in tok):
            continue
        if keep_digits and tok.isdigit():
            out.append(tok)
            continue
        stripped = "".join(
            ch for ch in tok if ch not in _PUNCT and (keep_digits or not ch.isdigit())
        )
        if stripped:
            out.append(stripped.lower())
    return out


def preprocess_pipeline(text: str, config: Optional[PipelineConfig] = None, source_id: str = "",
                        emoticon_map: Optional[EmoticonMap] = None) -> TokenSequence:
    """Run the full pipeline over one raw post."""
    cfg = config or PipelineConfig()
    tokens = tokenize(text)
    if cfg.convert_emoticons:
        tokens = convert_emoticons(tokens, emoticon_map)
    if cfg.split_hashtags:
        tokens = [piece for tok in tokens for piece in split_hashtag(tok)]
    if cfg.stem:
        tokens = [stem(tok) for tok in tokens]
    if cfg.clean:
        tokens = clean(tokens, keep_digits=cfg.keep_hashtag_digits)
    return TokenSequence(tuple(tokens), source_id=source_id)


def preprocess_corpus(corpus, config: Optional[PipelineConfig] = None,
                      emoticon_map: Optional[EmoticonMap] = None) -> list[TokenSequence]:
    """Preprocess every record of a corpus, preserving order."""
    return [
        preprocess_pipeline(rec.text, config, source_id=rec.id, emoticon_map=emoticon_map)
        for rec in corpus
    ]
