"""Deterministic text normalization: cleaning, tokenization, stop-word and
question-word removal, spelling normalization, stemming."""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import porter

_TOKEN_RE = re.compile(r"[a-z]+")
_MIN_TOKEN_LEN = 2


def load_stop_words(path: str | Path | None = None) -> frozenset[str]:
    """Read a stop-word list: one word per line, '#' starts a comment."""
    if path is None:
        text = resources.files("sagrade.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


def load_spelling_map(path: str | Path | None = None) -> dict[str, str]:
    """Read a variant,canonical CSV mapping applied before stemming."""
    if path is None:
        text = resources.files("sagrade.data").joinpath("spelling_map.csv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    reader = csv.DictReader(text.splitlines())
    return {row["variant"].strip().lower(): row["canonical"].strip().lower() for row in reader}


@dataclass(frozen=True)
class StopWordPolicy:
    """Stop words to strip from answers: a base list, per-question words, extras.

    question_words hold *stemmed* question terms; the raw lists are matched
    before stemming and the stemmed closure again afterwards.
    """

    base_list: frozenset[str] = field(default_factory=load_stop_words)
    question_words: frozenset[str] = frozenset()
    user_extra: frozenset[str] = frozenset()
    spelling_map: dict[str, str] = field(default_factory=load_spelling_map)

    def raw_words(self) -> frozenset[str]:
        return self.base_list | self.user_extra

    def stemmed_words(self) -> frozenset[str]:
        # Base-list words are matched raw, before stemming.  Stemming the base
        # list and matching again would eat content words whose stems collide
        # with a stop word ("one" -> "on"), so the post-stem pass only uses the
        # per-question words and user extras.
        stems = {porter.stem(self.spelling_map.get(w, w)) for w in self.user_extra}
        return frozenset(stems) | self.question_words


@dataclass(frozen=True)
class TokenizedDoc:
    """An answer after full preprocessing: ordered lowercase stemmed tokens."""

    source_id: str
    tokens: tuple[str, ...]

    def distinct(self) -> frozenset[str]:
        return frozenset(self.tokens)


def normalize_and_tokenize(text: str) -> list[str]:
    """Lowercase and split on non-letter boundaries, dropping digits,
    punctuation and tokens shorter than two characters."""
    return [t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= _MIN_TOKEN_LEN]


def remove_stop_words(tokens: list[str], stop: frozenset[str]) -> list[str]:
    return [t for t in tokens if t not in stop]


def stem(token: str) -> str:
    return porter.stem(token)


def stem_all(tokens: list[str]) -> list[str]:
    return [porter.stem(t) for t in tokens]


def make_policy(
    question_text: str = "",
    base_list: frozenset[str] | None = None,
    user_extra: frozenset[str] = frozenset(),
    spelling_map: dict[str, str] | None = None,
) -> StopWordPolicy:
    """Build a policy, deriving stemmed question words from the question text."""
    base = load_stop_words() if base_list is None else base_list
    smap = load_spelling_map() if spelling_map is None else spelling_map
    qtokens = normalize_and_tokenize(question_text)
    qtokens = remove_stop_words(qtokens, base | user_extra)
    qstems = frozenset(porter.stem(smap.get(t, t)) for t in qtokens)
    return StopWordPolicy(
        base_list=base,
        question_words=qstems,
        user_extra=user_extra,
        spelling_map=smap,
    )


def preprocess(text: str, policy: StopWordPolicy, source_id: str = "") -> TokenizedDoc:
    """Tokenize, strip stop words, normalize spelling, stem, then strip stop
    words once more against the stemmed policy sets."""
    tokens = normalize_and_tokenize(text)
    tokens = remove_stop_words(tokens, policy.raw_words())
    tokens = [policy.spelling_map.get(t, t) for t in tokens]
    tokens = stem_all(tokens)
    tokens = remove_stop_words(tokens, policy.stemmed_words())
    return TokenizedDoc(source_id=source_id, tokens=tuple(tokens))
