"""Tokenization, clause segmentation and lexicon-driven entity recognition.

Everything here is pure and deterministic: the same text and lexicons always
produce the same tokens, clauses and mentions. Lexicons are data files, not
code (one entry per line, ``#`` comments, optional tab-separated flags).
"""

from __future__ import annotations

import hashlib
import re
import unicodedata
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional, Sequence

from .errors import AlignmentError, InvalidSpan, ParseError


class EntityKind(Enum):
    SNP = "SNP"
    PHENOTYPE = "Phenotype"


class TokenKind(Enum):
    WORD = "Word"
    NUMBER = "Number"
    PUNCT = "Punct"
    SYMBOL = "Symbol"


@dataclass(frozen=True)
class Span:
    """Half-open character range [start, end) into the owning sentence."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise InvalidSpan(f"invalid span [{self.start}, {self.end})")

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end


@dataclass(frozen=True)
class EntityMention:
    kind: EntityKind
    span: Span
    surface: str
    normalized: str

    @classmethod
    def from_text(cls, kind: EntityKind, span: Span, text: str) -> "EntityMention":
        if span.end > len(text):
            raise InvalidSpan(
                f"span [{span.start}, {span.end}) exceeds sentence length {len(text)}"
            )
        surface = text[span.start : span.end]
        return cls(kind=kind, span=span, surface=surface,
                   normalized=" ".join(surface.lower().split()))


@dataclass(frozen=True)
class Token:
    surface: str
    span: Span
    kind: TokenKind
    lower: str


@dataclass(frozen=True)
class ClauseSpan:
    """Token-index range [start, end) forming one clause.

    ``opened_by`` is the lowercased connector phrase that opened the clause,
    or None for clauses opened by the sentence start or a punctuation break.
    """

    start: int
    end: int
    opened_by: Optional[str] = None

    def contains(self, token_index: int) -> bool:
        return self.start <= token_index < self.end


_NUMBER_RE = re.compile(r"\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")

_TOKEN_RE = re.compile(
    r"\d+\.\d+(?:[eE][+-]?\d+)?"             # decimal, optional exponent
    r"|\d+[eE][+-]?\d+"                      # exponent without decimal point
    r"|[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*"   # words; hyphen/apostrophe stay inside
    r"|\S"                                   # any other non-space char alone
)


def _token_kind(surface: str) -> TokenKind:
    if _NUMBER_RE.fullmatch(surface):
        return TokenKind.NUMBER
    if any(ch.isalnum() for ch in surface):
        return TokenKind.WORD
    if len(surface) == 1 and unicodedata.category(surface).startswith("P"):
        return TokenKind.PUNCT
    return TokenKind.SYMBOL


def _make_token(surface: str, start: int) -> Token:
    return Token(surface=surface, span=Span(start, start + len(surface)),
                 kind=_token_kind(surface), lower=surface.lower())


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into tokens whose spans index the original string.

    Alphanumeric runs (with internal hyphens/apostrophes, so biomedical terms
    like "tobacco-related" survive) form Word/Number tokens; every other
    non-space character is its own token. Trailing "n't" is split off so
    contracted negations match the cue lexicon.
    """
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(text):
        surface, start = m.group(0), m.start()
        low = surface.lower()
        if low.endswith("n't") and len(surface) > 3:
            tokens.append(_make_token(surface[:-3], start))
            tokens.append(_make_token(surface[-3:], start + len(surface) - 3))
        else:
            tokens.append(_make_token(surface, start))
    return tokens


# ---------------------------------------------------------------------------
# Lexicons


@dataclass(frozen=True)
class LexiconEntry:
    phrase: tuple[str, ...]            # lowercase token sequence
    flags: frozenset[str] = frozenset()

    @property
    def text(self) -> str:
        return " ".join(self.phrase)

    def has_flag(self, flag: str) -> bool:
        return flag in self.flags


class Lexicon:
    """A phrase list with optional per-entry flags, matched longest-first.

    Used for negation cues (flag ``backward``), clause connectors (flag
    ``concessive``), innate-polarity triggers, modality markers (flags are
    the tier) and phenotype gazetteers.
    """

    def __init__(self, entries: Iterable[LexiconEntry], name: str = "lexicon"):
        self.name = name
        self.entries: list[LexiconEntry] = []
        seen: set[tuple[str, ...]] = set()
        by_first: dict[str, list[LexiconEntry]] = {}
        for entry in entries:
            if not entry.phrase:
                raise ParseError("empty phrase in lexicon", locator=name)
            if entry.phrase in seen:
                raise ParseError(f"duplicate phrase {entry.text!r}", locator=name)
            seen.add(entry.phrase)
            self.entries.append(entry)
            by_first.setdefault(entry.phrase[0], []).append(entry)
        for bucket in by_first.values():
            bucket.sort(key=lambda e: len(e.phrase), reverse=True)
        self._by_first = by_first

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[LexiconEntry]:
        return iter(self.entries)

    def content_hash(self) -> str:
        canon = "\n".join(sorted(e.text + "\t" + ",".join(sorted(e.flags))
                                 for e in self.entries))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def match_at(self, lowers: Sequence[str], i: int) -> Optional[LexiconEntry]:
        """Longest entry whose phrase equals the token lowers starting at i."""
        for entry in self._by_first.get(lowers[i], ()):
            j = i + len(entry.phrase)
            if j <= len(lowers) and tuple(lowers[i:j]) == entry.phrase:
                return entry
        return None

    def find_all(self, tokens: Sequence[Token]) -> list[tuple[int, int, LexiconEntry]]:
        """Non-overlapping, leftmost-longest matches as (start, end, entry)."""
        lowers = [t.lower for t in tokens]
        out: list[tuple[int, int, LexiconEntry]] = []
        i = 0
        while i < len(lowers):
            entry = self.match_at(lowers, i)
            if entry is not None:
                out.append((i, i + len(entry.phrase), entry))
                i += len(entry.phrase)
            else:
                i += 1
        return out

    @classmethod
    def from_phrases(cls, phrases: Iterable[str | tuple[str, Iterable[str]]],
                     name: str = "lexicon") -> "Lexicon":
        entries = []
        for item in phrases:
            if isinstance(item, str):
                phrase, flags = item, ()
            else:
                phrase, flags = item
            toks = tuple(t.lower for t in tokenize(phrase))
            entries.append(LexiconEntry(phrase=toks, flags=frozenset(flags)))
        return cls(entries, name=name)

    @classmethod
    def from_lines(cls, lines: Iterable[str], name: str = "lexicon") -> "Lexicon":
        entries = []
        for lineno, raw in enumerate(lines, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            phrase = tuple(t.lower for t in tokenize(parts[0].strip()))
            flags = frozenset(p.strip().lower() for p in parts[1:] if p.strip())
            if not phrase:
                raise ParseError("blank phrase", locator=f"{name}:{lineno}")
            entries.append(LexiconEntry(phrase=phrase, flags=flags))
        return cls(entries, name=name)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        path = Path(path)
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh, name=path.name)


# All four lexicon roles share the implementation; the aliases document intent.
ConnectorLexicon = Lexicon
CueLexicon = Lexicon
TriggerLexicon = Lexicon
GazetteerLexicon = Lexicon


def _default(name: str) -> Lexicon:
    ref = resources.files(__package__) / "data" / name
    return Lexicon.from_lines(ref.read_text(encoding="utf-8").splitlines(), name=name)


def default_connectors() -> Lexicon:
    return _default("connectors.txt")


def default_cues() -> Lexicon:
    return _default("cues.txt")


def default_triggers() -> Lexicon:
    return _default("triggers.txt")


def default_modality() -> Lexicon:
    return _default("modality.txt")


def default_gazetteer() -> Lexicon:
    return _default("gazetteer.txt")


# ---------------------------------------------------------------------------
# Clause segmentation


def segment_clauses(tokens: Sequence[Token], connectors: Lexicon) -> list[ClauseSpan]:
    """Partition the token sequence into connector-delimited clauses.

    A connector occurrence opens a new clause (it becomes the clause's
    opener). A semicolon always closes the running clause. A comma closes
    the running clause only when that clause was itself opened by a
    connector, which detaches fronted subordinate clauses ("Although X, Y")
    without shredding ordinary comma-separated lists.
    """
    n = len(tokens)
    if n == 0:
        return []
    matches = {i: (j, entry) for i, j, entry in connectors.find_all(tokens)}
    clauses: list[ClauseSpan] = []
    start = 0
    opener: Optional[str] = None
    i = 0
    while i < n:
        if i in matches:
            j, entry = matches[i]
            if i > start:
                clauses.append(ClauseSpan(start, i, opener))
                start = i
            opener = entry.text
            i = j
            continue
        surface = tokens[i].surface
        if surface == ";" and i + 1 < n:
            clauses.append(ClauseSpan(start, i + 1, opener))
            start, opener = i + 1, None
        elif surface == "," and opener is not None and i + 1 < n:
            clauses.append(ClauseSpan(start, i + 1, opener))
            start, opener = i + 1, None
        i += 1
    if start < n:
        clauses.append(ClauseSpan(start, n, opener))
    return clauses


def covering_token_range(tokens: Sequence[Token], span: Span) -> tuple[int, int]:
    """Token-index range [first, last+1) of tokens overlapping a char span."""
    hit = [k for k, t in enumerate(tokens) if t.span.overlaps(span)]
    if not hit:
        raise AlignmentError(
            f"span [{span.start}, {span.end}) covers no token"
        )
    return hit[0], hit[-1] + 1


def clause_of(clauses: Sequence[ClauseSpan], token_index: int) -> ClauseSpan:
    for clause in clauses:
        if clause.contains(token_index):
            return clause
    raise IndexError(f"token index {token_index} outside all clauses")


# ---------------------------------------------------------------------------
# Entity recognition (raw-text extraction mode)


_RSID_RE = re.compile(r"rs\d{1,10}")


def recognize_snps(tokens: Sequence[Token]) -> list[EntityMention]:
    """SNP mentions: tokens shaped like an rsID (rs + 1-10 digits)."""
    out = []
    for tok in tokens:
        if _RSID_RE.fullmatch(tok.lower):
            out.append(EntityMention(kind=EntityKind.SNP, span=tok.span,
                                     surface=tok.surface, normalized=tok.lower))
    return out


def recognize_phenotypes(text: str, tokens: Sequence[Token],
                         gazetteer: Lexicon) -> list[EntityMention]:
    """Phenotype mentions by longest-match gazetteer lookup over tokens."""
    out = []
    for i, j, _entry in gazetteer.find_all(tokens):
        span = Span(tokens[i].span.start, tokens[j - 1].span.end)
        out.append(EntityMention.from_text(EntityKind.PHENOTYPE, span, text))
    return out
