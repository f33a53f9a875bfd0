"""Corpus data model, ingestion, splitting and corpus verification statistics.

The native on-disk form is JSON-lines, one document per line:

    {"id": ..., "sentences": [{"id": ..., "text": ...,
        "entities": [{"kind": "SNP"|"Phenotype", "start": int, "end": int}],
        "pairs": [{"snp": idx, "phenotype": idx, "label": ..., "confidence": ...}]}]}

An optional per-document "split" field ("Train"/"Test") carries a
pre-assigned split through serialization. An XML adapter handles corpora
shipped as standoff XML; its element/attribute names come from an INI
ingestion config because schemas vary between corpus releases.

A Corpus is immutable after ingestion; splitting returns a new Corpus.
"""

from __future__ import annotations

import configparser
import json
import random
from dataclasses import dataclass, field, replace
from enum import Enum, IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Optional
from xml.etree import ElementTree

from . import textproc
from .errors import InvalidSpan, ParseError, TooSmall, UnknownLabel
from .textproc import (
    CueLexicon,
    ConnectorLexicon,
    EntityKind,
    EntityMention,
    Span,
    TriggerLexicon,
    covering_token_range,
    tokenize,
)


class GoldLabel(Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    NEUTRAL = "Neutral"


class ConfidenceLevel(IntEnum):
    """Three-level confidence scale, totally ordered Low < Medium < High."""

    LOW = 1
    MEDIUM = 2
    HIGH = 3

    @property
    def label(self) -> str:
        return self.name.title()


class Split(Enum):
    TRAIN = "Train"
    TEST = "Test"
    UNSPLIT = "Unsplit"


_DEFAULT_LABEL_MAP = {
    "positive": GoldLabel.POSITIVE,
    "negative": GoldLabel.NEGATIVE,
    "neutral": GoldLabel.NEUTRAL,
}
_DEFAULT_CONFIDENCE_MAP = {
    "low": ConfidenceLevel.LOW,
    "medium": ConfidenceLevel.MEDIUM,
    "high": ConfidenceLevel.HIGH,
}
_SPLIT_BY_NAME = {"train": Split.TRAIN, "test": Split.TEST, "unsplit": Split.UNSPLIT}


@dataclass
class CandidatePair:
    """One (SNP mention, phenotype mention) pair in one sentence."""

    id: str
    snp: EntityMention
    phenotype: EntityMention
    gold_label: Optional[GoldLabel] = None
    gold_confidence: Optional[ConfidenceLevel] = None

    def __post_init__(self):
        if self.snp.kind is not EntityKind.SNP:
            raise ValueError(f"candidate {self.id}: snp mention has kind {self.snp.kind}")
        if self.phenotype.kind is not EntityKind.PHENOTYPE:
            raise ValueError(
                f"candidate {self.id}: phenotype mention has kind {self.phenotype.kind}"
            )


@dataclass
class Sentence:
    id: str
    text: str
    mentions: list[EntityMention] = field(default_factory=list)
    candidates: list[CandidatePair] = field(default_factory=list)


@dataclass
class Document:
    id: str
    sentences: list[Sentence] = field(default_factory=list)
    split: Split = Split.UNSPLIT


@dataclass
class Corpus:
    documents: list[Document] = field(default_factory=list)

    def iter_sentences(self) -> Iterator[tuple[Document, Sentence]]:
        for doc in self.documents:
            for sent in doc.sentences:
                yield doc, sent

    def iter_candidates(self) -> Iterator[tuple[Document, Sentence, CandidatePair]]:
        for doc, sent in self.iter_sentences():
            for cand in sent.candidates:
                yield doc, sent, cand

    def n_candidates(self) -> int:
        return sum(1 for _ in self.iter_candidates())

    def subset(self, split: Split) -> "Corpus":
        return Corpus([doc for doc in self.documents if doc.split is split])

    def with_documents(self, documents: list[Document]) -> "Corpus":
        return Corpus(documents)


def enumerate_candidates(sentence: Sentence) -> list[CandidatePair]:
    """Cross product of co-sentence SNP and phenotype mentions.

    Ordered by SNP start offset, then phenotype start offset; ids are
    derived from the sentence id and the pair's position in that order.
    """
    snps = sorted((m for m in sentence.mentions if m.kind is EntityKind.SNP),
                  key=lambda m: m.span.start)
    phens = sorted((m for m in sentence.mentions if m.kind is EntityKind.PHENOTYPE),
                   key=lambda m: m.span.start)
    out = []
    k = 0
    for snp in snps:
        for phen in phens:
            out.append(CandidatePair(id=f"{sentence.id}:{k}", snp=snp, phenotype=phen))
            k += 1
    return out


# ---------------------------------------------------------------------------
# Ingestion


@dataclass
class IngestionConfig:
    """Field/element names and label tables for corpus ingestion.

    ``label_map`` / ``confidence_map`` extend the built-in tables
    (positive/negative/neutral, low/medium/high; matching is
    case-insensitive) with corpus-specific strings.
    """

    format: Optional[str] = None               # "jsonl" | "xml"; None = by extension
    label_map: dict[str, GoldLabel] = field(default_factory=dict)
    confidence_map: dict[str, ConfidenceLevel] = field(default_factory=dict)
    # XML adapter knobs (defaults follow common standoff-XML corpus layouts)
    document_element: str = "document"
    sentence_element: str = "sentence"
    entity_element: str = "entity"
    pair_element: str = "pair"
    id_attr: str = "id"
    text_attr: str = "text"
    entity_kind_attr: str = "type"
    entity_kind_map: dict[str, EntityKind] = field(default_factory=dict)
    offset_attr: str = "charOffset"
    offset_end_inclusive: bool = True
    pair_snp_attr: str = "e1"
    pair_phenotype_attr: str = "e2"
    label_attr: str = "association"
    confidence_attr: str = "confidence"

    def resolve_label(self, raw: str) -> GoldLabel:
        key = raw.strip().lower()
        if key in self.label_map:
            return self.label_map[key]
        if key in _DEFAULT_LABEL_MAP:
            return _DEFAULT_LABEL_MAP[key]
        raise UnknownLabel(raw)

    def resolve_confidence(self, raw: str) -> ConfidenceLevel:
        key = raw.strip().lower()
        if key in self.confidence_map:
            return self.confidence_map[key]
        if key in _DEFAULT_CONFIDENCE_MAP:
            return _DEFAULT_CONFIDENCE_MAP[key]
        raise UnknownLabel(raw)

    def resolve_kind(self, raw: str) -> EntityKind:
        key = raw.strip().lower()
        kinds = {"snp": EntityKind.SNP, "phenotype": EntityKind.PHENOTYPE}
        kinds.update({k.lower(): v for k, v in self.entity_kind_map.items()})
        if key in kinds:
            return kinds[key]
        raise UnknownLabel(raw)

    @classmethod
    def from_ini(cls, path: str | Path) -> "IngestionConfig":
        parser = configparser.ConfigParser()
        read = parser.read(path, encoding="utf-8")
        if not read:
            raise ParseError("cannot read ingestion config", locator=str(path))
        cfg = cls()
        if parser.has_section("format"):
            cfg.format = parser.get("format", "type", fallback=None)
        if parser.has_section("labels"):
            for raw, canon in parser.items("labels"):
                canon_key = canon.strip().lower()
                if canon_key not in _DEFAULT_LABEL_MAP:
                    raise ParseError(f"unknown canonical label {canon!r}",
                                     locator=f"{path}:[labels]")
                cfg.label_map[raw.lower()] = _DEFAULT_LABEL_MAP[canon_key]
        if parser.has_section("confidence"):
            for raw, canon in parser.items("confidence"):
                canon_key = canon.strip().lower()
                if canon_key not in _DEFAULT_CONFIDENCE_MAP:
                    raise ParseError(f"unknown canonical confidence {canon!r}",
                                     locator=f"{path}:[confidence]")
                cfg.confidence_map[raw.lower()] = _DEFAULT_CONFIDENCE_MAP[canon_key]
        if parser.has_section("entity_kinds"):
            for raw, canon in parser.items("entity_kinds"):
                canon_key = canon.strip().lower()
                if canon_key not in ("snp", "phenotype"):
                    raise ParseError(f"unknown entity kind {canon!r}",
                                     locator=f"{path}:[entity_kinds]")
                cfg.entity_kind_map[raw.lower()] = (
                    EntityKind.SNP if canon_key == "snp" else EntityKind.PHENOTYPE
                )
        if parser.has_section("xml"):
            for key, value in parser.items("xml"):
                if key == "offset_end":
                    cfg.offset_end_inclusive = value.strip().lower() == "inclusive"
                elif hasattr(cfg, key):
                    setattr(cfg, key, value.strip())
                else:
                    raise ParseError(f"unknown xml config key {key!r}",
                                     locator=f"{path}:[xml]")
        return cfg


def _mention_from_raw(kind: EntityKind, start: int, end: int, sentence: Sentence,
                      locator: str) -> EntityMention:
    try:
        span = Span(int(start), int(end))
        return EntityMention.from_text(kind, span, sentence.text)
    except InvalidSpan as exc:
        raise InvalidSpan(f"{exc} in {locator}") from None


def _check_unique(values: Iterable[str], what: str) -> None:
    seen = set()
    for v in values:
        if v in seen:
            raise ParseError(f"duplicate {what} {v!r}")
        seen.add(v)


def _validate_corpus(corpus: Corpus) -> Corpus:
    _check_unique((d.id for d in corpus.documents), "document id")
    for doc in corpus.documents:
        _check_unique((s.id for s in doc.sentences), f"sentence id in document {doc.id}")
    _check_unique((c.id for _, _, c in corpus.iter_candidates()), "candidate id")
    return corpus


def _ingest_jsonl(path: Path, config: IngestionConfig) -> Corpus:
    documents = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", locator=f"{path}:{lineno}") from None
            try:
                documents.append(_document_from_dict(raw, config, f"{path}:{lineno}"))
            except KeyError as exc:
                raise ParseError(f"missing field {exc}", locator=f"{path}:{lineno}") from None
    return _validate_corpus(Corpus(documents))


def _document_from_dict(raw: dict, config: IngestionConfig, locator: str) -> Document:
    doc_id = str(raw["id"])
    split = Split.UNSPLIT
    if raw.get("split") is not None:
        split_key = str(raw["split"]).strip().lower()
        if split_key not in _SPLIT_BY_NAME:
            raise UnknownLabel(raw["split"])
        split = _SPLIT_BY_NAME[split_key]
    sentences = []
    for sraw in raw["sentences"]:
        sent = Sentence(id=str(sraw["id"]), text=sraw["text"])
        for k, eraw in enumerate(sraw.get("entities", [])):
            kind = config.resolve_kind(str(eraw["kind"]))
            sent.mentions.append(_mention_from_raw(
                kind, eraw["start"], eraw["end"], sent,
                f"{locator} sentence {sent.id} entity {k}"))
        for k, praw in enumerate(sraw.get("pairs", [])):
            cand_id = f"{doc_id}:{sent.id}:{k}"
            try:
                snp = sent.mentions[int(praw["snp"])]
                phen = sent.mentions[int(praw["phenotype"])]
            except IndexError:
                raise ParseError(f"pair references missing entity",
                                 locator=f"{locator} sentence {sent.id} pair {k}") from None
            label = None
            confidence = None
            if praw.get("label") is not None:
                label = config.resolve_label(str(praw["label"]))
            if praw.get("confidence") is not None:
                confidence = config.resolve_confidence(str(praw["confidence"]))
            try:
                sent.candidates.append(CandidatePair(
                    id=cand_id, snp=snp, phenotype=phen,
                    gold_label=label, gold_confidence=confidence))
            except ValueError as exc:
                raise ParseError(str(exc), locator=f"{locator} sentence {sent.id}") from None
        sentences.append(sent)
    return Document(id=doc_id, sentences=sentences, split=split)


def _parse_offsets(raw: str, inclusive_end: bool, locator: str) -> tuple[int, int]:
    # Discontinuous offsets ("a-b;c-d") collapse to their envelope.
    try:
        parts = [seg.split("-") for seg in raw.split(";")]
        starts = [int(p[0]) for p in parts]
        ends = [int(p[1]) for p in parts]
    except (ValueError, IndexError):
        raise ParseError(f"bad offset string {raw!r}", locator=locator) from None
    end = max(ends) + (1 if inclusive_end else 0)
    return min(starts), end


def _ingest_xml_file(path: Path, config: IngestionConfig) -> list[Document]:
    try:
        root = ElementTree.parse(path).getroot()
    except ElementTree.ParseError as exc:
        raise ParseError(f"bad XML: {exc}", locator=str(path)) from None
    doc_elements = list(root.iter(config.document_element))
    if not doc_elements and root.tag == config.document_element:
        doc_elements = [root]
    if not doc_elements:
        raise ParseError(f"no <{config.document_element}> elements", locator=str(path))
    documents = []
    for del_idx, doc_el in enumerate(doc_elements):
        doc_id = doc_el.get(config.id_attr) or f"{path.stem}:{del_idx}"
        sentences = []
        for sent_el in doc_el.iter(config.sentence_element):
            sent_id = sent_el.get(config.id_attr) or f"s{len(sentences)}"
            text = sent_el.get(config.text_attr)
            if text is None:
                text = (sent_el.text or "").strip()
            sent = Sentence(id=sent_id, text=text)
            by_entity_id = {}
            for k, ent_el in enumerate(sent_el.iter(config.entity_element)):
                locator = f"{path} sentence {sent_id} entity {k}"
                kind_raw = ent_el.get(config.entity_kind_attr)
                if kind_raw is None:
                    raise ParseError(f"entity missing @{config.entity_kind_attr}",
                                     locator=locator)
                offset_raw = ent_el.get(config.offset_attr)
                if offset_raw is None:
                    raise ParseError(f"entity missing @{config.offset_attr}",
                                     locator=locator)
                start, end = _parse_offsets(offset_raw, config.offset_end_inclusive,
                                            locator)
                mention = _mention_from_raw(config.resolve_kind(kind_raw),
                                            start, end, sent, locator)
                sent.mentions.append(mention)
                ent_id = ent_el.get(config.id_attr)
                if ent_id is not None:
                    by_entity_id[ent_id] = mention
            for k, pair_el in enumerate(sent_el.iter(config.pair_element)):
                locator = f"{path} sentence {sent_id} pair {k}"
                ref1 = pair_el.get(config.pair_snp_attr)
                ref2 = pair_el.get(config.pair_phenotype_attr)
                if ref1 not in by_entity_id or ref2 not in by_entity_id:
                    raise ParseError("pair references unknown entity id", locator=locator)
                m1, m2 = by_entity_id[ref1], by_entity_id[ref2]
                kinds = {m1.kind: m1, m2.kind: m2}
                if set(kinds) != {EntityKind.SNP, EntityKind.PHENOTYPE}:
                    raise ParseError("pair is not one SNP plus one phenotype",
                                     locator=locator)
                label = None
                confidence = None
                label_raw = pair_el.get(config.label_attr)
                if label_raw is not None:
                    label = config.resolve_label(label_raw)
                conf_raw = pair_el.get(config.confidence_attr)
                if conf_raw is not None and conf_raw.strip():
                    confidence = config.resolve_confidence(conf_raw)
                cand_id = pair_el.get(config.id_attr) or f"{doc_id}:{sent_id}:{k}"
                sent.candidates.append(CandidatePair(
                    id=cand_id, snp=kinds[EntityKind.SNP],
                    phenotype=kinds[EntityKind.PHENOTYPE],
                    gold_label=label, gold_confidence=confidence))
            sentences.append(sent)
        documents.append(Document(id=doc_id, sentences=sentences))
    return documents


def ingest_corpus(path: str | Path, config: Optional[IngestionConfig] = None) -> Corpus:
    """Load a corpus from JSON-lines, a standoff XML file, or a directory
    of XML files. Gold labels are mapped into the fixed
    Positive/Negative/Neutral and Low/Medium/High vocabularies."""
    path = Path(path)
    config = config or IngestionConfig()
    if not path.exists():
        raise ParseError("no such file", locator=str(path))
    fmt = config.format
    if fmt is None:
        if path.is_dir() or path.suffix.lower() == ".xml":
            fmt = "xml"
        else:
            fmt = "jsonl"
    if fmt == "jsonl":
        return _ingest_jsonl(path, config)
    if fmt == "xml":
        files = sorted(path.glob("*.xml")) if path.is_dir() else [path]
        if not files:
            raise ParseError("no XML files in directory", locator=str(path))
        documents = []
        for f in files:
            documents.extend(_ingest_xml_file(f, config))
        return _validate_corpus(Corpus(documents))
    raise ParseError(f"unknown corpus format {fmt!r}")


def document_to_dict(doc: Document) -> dict:
    out: dict = {"id": doc.id, "sentences": []}
    if doc.split is not Split.UNSPLIT:
        out["split"] = doc.split.value
    for sent in doc.sentences:
        mention_index = {id(m): k for k, m in enumerate(sent.mentions)}
        sraw: dict = {
            "id": sent.id,
            "text": sent.text,
            "entities": [{"kind": m.kind.value, "start": m.span.start, "end": m.span.end}
                         for m in sent.mentions],
            "pairs": [],
        }
        for cand in sent.candidates:
            praw: dict = {
                "snp": mention_index[id(cand.snp)],
                "phenotype": mention_index[id(cand.phenotype)],
            }
            if cand.gold_label is not None:
                praw["label"] = cand.gold_label.value
            if cand.gold_confidence is not None:
                praw["confidence"] = cand.gold_confidence.label
            sraw["pairs"].append(praw)
        out["sentences"].append(sraw)
    return out


def corpus_to_jsonl(corpus: Corpus) -> str:
    return "".join(json.dumps(document_to_dict(d), ensure_ascii=False) + "\n"
                   for d in corpus.documents)


def write_jsonl(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(corpus_to_jsonl(corpus), encoding="utf-8")


# ---------------------------------------------------------------------------
# Splitting


def split_corpus(corpus: Corpus, ratio: Optional[float] = None, seed: int = 0) -> Corpus:
    """Assign Train/Test tags at document level.

    With ``ratio`` absent the corpus passes through unchanged (pre-tagged
    corpora). Otherwise documents are shuffled deterministically by ``seed``
    and the first round(ratio * n) become Train.
    """
    if ratio is None:
        return corpus
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    n = len(corpus.documents)
    if n < 2:
        raise TooSmall(f"need at least 2 documents to split, have {n}")
    order = list(range(n))
    random.Random(seed).shuffle(order)
    n_train = min(max(int(round(ratio * n)), 1), n - 1)
    train_idx = set(order[:n_train])
    documents = [replace(doc, split=Split.TRAIN if i in train_idx else Split.TEST)
                 for i, doc in enumerate(corpus.documents)]
    return Corpus(documents)


# ---------------------------------------------------------------------------
# Verification statistics


@dataclass
class VerificationReport:
    n_candidates: int
    n_sentences: int
    avg_tokens_per_sentence: float
    connector_histogram: dict[str, int]
    concessive_instance_ratio: float
    candidates_with_connector_ratio: float
    avg_snp_per_sentence: float
    avg_phenotype_per_sentence: float
    innate_positive: int
    innate_negative: int

    def to_dict(self) -> dict:
        return {
            "n_candidates": self.n_candidates,
            "n_sentences": self.n_sentences,
            "avg_tokens_per_sentence": self.avg_tokens_per_sentence,
            "connector_histogram": dict(sorted(self.connector_histogram.items(),
                                               key=lambda kv: (-kv[1], kv[0]))),
            "concessive_instance_ratio": self.concessive_instance_ratio,
            "candidates_with_connector_ratio": self.candidates_with_connector_ratio,
            "avg_snp_per_sentence": self.avg_snp_per_sentence,
            "avg_phenotype_per_sentence": self.avg_phenotype_per_sentence,
            "innate_positive": self.innate_positive,
            "innate_negative": self.innate_negative,
        }


def estimate_innate_polarity(corpus: Corpus, cues: CueLexicon,
                             triggers: TriggerLexicon,
                             adjacency: int = 2) -> tuple[int, int]:
    """Count innate-positive / innate-negative candidates.

    Only candidates in cue-free sentences are tallied. A candidate counts
    positive when a trigger phrase occurs between its entities or within
    ``adjacency`` tokens of them, negative otherwise.
    """
    positive = 0
    negative = 0
    for _doc, sent in corpus.iter_sentences():
        if not sent.candidates:
            continue
        tokens = tokenize(sent.text)
        if cues.find_all(tokens):
            continue
        trigger_hits = triggers.find_all(tokens)
        for cand in sent.candidates:
            s1, e1 = covering_token_range(tokens, cand.snp.span)
            s2, e2 = covering_token_range(tokens, cand.phenotype.span)
            lo = min(s1, s2) - adjacency
            hi = max(e1, e2) + adjacency
            if any(i < hi and j > lo for i, j, _ in trigger_hits):
                positive += 1
            else:
                negative += 1
    return positive, negative


def compute_verification_stats(corpus: Corpus, connectors: ConnectorLexicon,
                               cues: CueLexicon,
                               triggers: Optional[TriggerLexicon] = None) -> VerificationReport:
    """Corpus complexity and polarity statistics.

    ``triggers`` defaults to the packaged trigger lexicon; it feeds the
    innate-polarity estimate included in the report.
    """
    if triggers is None:
        triggers = textproc.default_triggers()
    n_sentences = 0
    n_tokens = 0
    n_snp = 0
    n_phen = 0
    n_candidates = 0
    with_connector = 0
    concessive = 0
    histogram: dict[str, int] = {}
    for _doc, sent in corpus.iter_sentences():
        n_sentences += 1
        tokens = tokenize(sent.text)
        n_tokens += len(tokens)
        n_snp += sum(1 for m in sent.mentions if m.kind is EntityKind.SNP)
        n_phen += sum(1 for m in sent.mentions if m.kind is EntityKind.PHENOTYPE)
        hits = connectors.find_all(tokens)
        for _i, _j, entry in hits:
            histogram[entry.text] = histogram.get(entry.text, 0) + 1
        has_connector = bool(hits)
        has_concessive = any(entry.has_flag("concessive") for _i, _j, entry in hits)
        n_candidates += len(sent.candidates)
        if has_connector:
            with_connector += len(sent.candidates)
        if has_concessive:
            concessive += len(sent.candidates)
    innate_pos, innate_neg = estimate_innate_polarity(corpus, cues, triggers)
    return VerificationReport(
        n_candidates=n_candidates,
        n_sentences=n_sentences,
        avg_tokens_per_sentence=n_tokens / n_sentences if n_sentences else 0.0,
        connector_histogram=histogram,
        concessive_instance_ratio=concessive / n_candidates if n_candidates else 0.0,
        candidates_with_connector_ratio=(with_connector / n_candidates
                                         if n_candidates else 0.0),
        avg_snp_per_sentence=n_snp / n_sentences if n_sentences else 0.0,
        avg_phenotype_per_sentence=n_phen / n_sentences if n_sentences else 0.0,
        innate_positive=innate_pos,
        innate_negative=innate_neg,
    )
