"""Deterministic synthetic clinical corpus with single-word errors.

Generates paired train/test splits from templated clinical sentences:
flagged records carry exactly one corrupted word drawn from a confusion
table whose wrong-word side never appears in clean text, and a configurable
share of test paragraphs are near-duplicates of flagged training paragraphs
(one filler changed in a non-error sentence). The generator's bookkeeping is
the ground truth that end-to-end runs are scored against.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import (
    NO_CORRECTION,
    NO_ERROR_INDEX,
    ClinicalRecord,
    ColumnSchema,
    parse_numbered_sentences,
    write_dataset,
)

TEMPLATES: list[tuple[str, tuple[str, ...]]] = [
    ("The patient was started on {drug} for persistent {condition}.", ("drug", "condition")),
    ("He reports {symptom} that began roughly three days ago.", ("symptom",)),
    ("Examination of the {site} reveals marked {finding} on palpation.", ("site", "finding")),
    ("Laboratory studies show an elevated {analyte} level on admission.", ("analyte",)),
    ("Vital signs remain stable apart from intermittent {vital} overnight.", ("vital",)),
    ("The family history is notable for {condition} in a first degree relative.", ("condition",)),
    ("She denies any recent {symptom} or associated weight loss.", ("symptom",)),
    ("Imaging of the {site} demonstrates {finding} unchanged from prior studies.", ("site", "finding")),
    ("Discharge plans include continued {drug} therapy with close follow up.", ("drug",)),
    ("The care team reviewed {condition} management and medication adherence.", ("condition",)),
    ("Repeat testing confirmed the {analyte} abnormality noted earlier.", ("analyte",)),
    ("A short course of {drug} was considered but deferred pending review.", ("drug",)),
    ("Nursing notes describe episodes of {symptom} responding to supportive care.", ("symptom",)),
    ("Point of care ultrasound of the {site} shows no acute {finding}.", ("site", "finding")),
]

FILLERS: dict[str, tuple[str, ...]] = {
    "drug": (
        "aspirin", "metformin", "lisinopril", "amoxicillin",
        "warfarin", "atorvastatin", "insulin", "prednisone",
    ),
    "condition": (
        "hypertension", "diabetes", "pneumonia", "anemia",
        "asthma", "arthritis", "migraine", "hypothyroidism",
    ),
    "symptom": (
        "dizziness", "nausea", "fatigue", "palpitations",
        "headaches", "chills", "vomiting", "dyspnea",
    ),
    "site": (
        "abdomen", "chest", "forearm", "ankle",
        "scalp", "shoulder", "spine", "pelvis",
    ),
    "finding": (
        "swelling", "tenderness", "nodularity", "bruising",
        "crepitus", "effusion", "induration", "ecchymosis",
    ),
    "analyte": (
        "creatinine", "potassium", "glucose", "troponin",
        "lactate", "bilirubin", "ferritin", "sodium",
    ),
    "vital": (
        "tachycardia", "bradycardia", "hypoxia", "desaturation",
        "tachypnea", "rigors", "diaphoresis", "restlessness",
    ),
}

# correct word -> wrong word; the wrong side never appears in any filler
# pool or template, so clean text never contains a corruption token.
CONFUSIONS: dict[str, str] = {
    "aspirin": "asprin",
    "metformin": "metforman",
    "lisinopril": "lisinoprel",
    "amoxicillin": "amoxicilin",
    "warfarin": "warfrin",
    "atorvastatin": "atorvastatine",
    "insulin": "insuline",
    "prednisone": "prednizone",
    "hypertension": "hypotension",
    "diabetes": "diabetis",
    "pneumonia": "pnuemonia",
    "anemia": "anaemia",
    "asthma": "asthama",
    "arthritis": "arthritus",
    "migraine": "migrane",
    "hypothyroidism": "hyperthyroidism",
    "dizziness": "dizzyness",
    "nausea": "nausia",
    "fatigue": "fatige",
    "palpitations": "palpatations",
    "headaches": "headakes",
    "chills": "shivers",
    "vomiting": "vommiting",
    "dyspnea": "dyspnoea",
    "abdomen": "abdomin",
    "chest": "thorax",
    "forearm": "forarm",
    "ankle": "anckle",
    "scalp": "scalpe",
    "shoulder": "sholder",
    "spine": "spleen",
    "pelvis": "pelvus",
    "swelling": "sweling",
    "tenderness": "tendernes",
    "nodularity": "nodularite",
    "bruising": "brusing",
    "crepitus": "crepitis",
    "effusion": "effusian",
    "induration": "indurration",
    "ecchymosis": "ecchimosis",
    "creatinine": "creatinen",
    "potassium": "potasium",
    "glucose": "glucagon",
    "troponin": "troponen",
    "lactate": "lactase",
    "bilirubin": "billirubin",
    "ferritin": "ferriten",
    "sodium": "sodim",
    "tachycardia": "tachicardia",
    "bradycardia": "bradicardia",
    "hypoxia": "hipoxia",
    "desaturation": "desaturration",
    "tachypnea": "tachipnea",
    "rigors": "riggers",
    "diaphoresis": "diaphresis",
    "restlessness": "restlesness",
}


@dataclass(frozen=True)
class SyntheticConfig:
    n_train: int = 500
    n_test: int = 200
    error_rate: float = 0.5
    near_dup_rate: float = 0.4
    shuffled_indices: bool = False
    min_sentences: int = 3
    max_sentences: int = 6
    seed: int = 1234


@dataclass(frozen=True)
class TestExpectation:
    """Generator-side truth for one test record."""

    text_id: str
    flag: bool
    error_index: int
    corrected_sentence: str
    near_dup: bool
    source_text_id: str | None = None


@dataclass
class SyntheticCorpus:
    train: list[ClinicalRecord]
    test: list[ClinicalRecord]
    expectations: dict[str, TestExpectation] = field(default_factory=dict)


@dataclass
class _SentenceDraft:
    template_id: int
    fillers: dict[str, str]

    def body(self) -> str:
        template, _ = TEMPLATES[self.template_id]
        return template.format(**self.fillers)


@dataclass
class _RecordDraft:
    sentences: list[_SentenceDraft]
    error_pos: int | None  # position, not declared index
    corrupted_word: str | None

    def bodies(self) -> list[str]:
        out = []
        for pos, draft in enumerate(self.sentences):
            body = draft.body()
            if pos == self.error_pos and self.corrupted_word is not None:
                body = body.replace(self.corrupted_word, CONFUSIONS[self.corrupted_word], 1)
            out.append(body)
        return out


def _token_set(text: str) -> frozenset[str]:
    return frozenset(
        "".join(ch for ch in tok.lower() if ch.isalnum()) for tok in text.split()
    )


def _jaccard(a: frozenset[str], b: frozenset[str]) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


class _Generator:
    def __init__(self, cfg: SyntheticConfig):
        self.cfg = cfg
        self.rng = random.Random(cfg.seed)
        self.seen_token_sets: list[frozenset[str]] = []

    def _draft_sentence(self) -> _SentenceDraft:
        template_id = self.rng.randrange(len(TEMPLATES))
        _, slots = TEMPLATES[template_id]
        fillers = {slot: self.rng.choice(FILLERS[slot]) for slot in slots}
        return _SentenceDraft(template_id=template_id, fillers=fillers)

    def _draft_record(self, flagged: bool) -> _RecordDraft:
        for _ in range(200):
            k = self.rng.randint(self.cfg.min_sentences, self.cfg.max_sentences)
            template_ids = self.rng.sample(range(len(TEMPLATES)), k)
            sentences = []
            for template_id in template_ids:
                _, slots = TEMPLATES[template_id]
                fillers = {slot: self.rng.choice(FILLERS[slot]) for slot in slots}
                sentences.append(_SentenceDraft(template_id=template_id, fillers=fillers))
            error_pos = None
            corrupted = None
            if flagged:
                error_pos = self.rng.randrange(k)
                slot = self.rng.choice(sorted(sentences[error_pos].fillers))
                corrupted = sentences[error_pos].fillers[slot]
            draft = _RecordDraft(sentences=sentences, error_pos=error_pos, corrupted_word=corrupted)
            tokens = _token_set("\n".join(s.body() for s in draft.sentences))
            if all(_jaccard(tokens, prev) < 0.7 for prev in self.seen_token_sets):
                self.seen_token_sets.append(tokens)
                return draft
        raise RuntimeError("could not draft a sufficiently distinct record; widen the template pool")

    def _declared_indices(self, k: int) -> list[int]:
        indices = list(range(k))
        if not self.cfg.shuffled_indices or k < 2:
            return indices
        shuffled = indices[:]
        while shuffled == indices:
            self.rng.shuffle(shuffled)
        return shuffled

    def _to_record(self, draft: _RecordDraft, text_id: str, declared: list[int]) -> ClinicalRecord:
        bodies = draft.bodies()
        text = "\n".join(bodies)
        sentences_block = "\n".join(
            f"{idx} {body}" for idx, body in zip(declared, bodies)
        )
        indexed = parse_numbered_sentences(sentences_block)
        if draft.error_pos is None:
            return ClinicalRecord(
                text_id=text_id,
                text=text,
                indexed_sentences=indexed,
                gold_flag=False,
                gold_error_index=NO_ERROR_INDEX,
                gold_corrected_sentence=NO_CORRECTION,
                gold_corrected_text=None,
            )
        original_bodies = [s.body() for s in draft.sentences]
        return ClinicalRecord(
            text_id=text_id,
            text=text,
            indexed_sentences=indexed,
            gold_flag=True,
            gold_error_index=declared[draft.error_pos],
            gold_corrected_sentence=original_bodies[draft.error_pos],
            gold_corrected_text="\n".join(original_bodies),
        )

    def _near_dup(self, source: _RecordDraft) -> _RecordDraft:
        sentences = [
            _SentenceDraft(template_id=s.template_id, fillers=dict(s.fillers))
            for s in source.sentences
        ]
        positions = [p for p in range(len(sentences)) if p != source.error_pos]
        pos = self.rng.choice(positions)
        draft = sentences[pos]
        slot = self.rng.choice(sorted(draft.fillers))
        current = draft.fillers[slot]
        alternatives = [w for w in FILLERS[slot] if w != current]
        draft.fillers[slot] = self.rng.choice(alternatives)
        return _RecordDraft(
            sentences=sentences,
            error_pos=source.error_pos,
            corrupted_word=source.corrupted_word,
        )


def generate_corpus(cfg: SyntheticConfig | None = None) -> SyntheticCorpus:
    """Build deterministic train/test splits with generator ground truth."""
    if cfg is None:
        cfg = SyntheticConfig()
    gen = _Generator(cfg)
    corpus = SyntheticCorpus(train=[], test=[])

    train_drafts: list[tuple[_RecordDraft, list[int], str]] = []
    flagged_train: list[tuple[_RecordDraft, list[int], str]] = []
    for i in range(cfg.n_train):
        flagged = gen.rng.random() < cfg.error_rate
        if i == 0:
            flagged = True  # training requires at least one flagged record
        draft = gen._draft_record(flagged)
        declared = gen._declared_indices(len(draft.sentences))
        text_id = f"train-{i:04d}"
        record = gen._to_record(draft, text_id, declared)
        corpus.train.append(record)
        train_drafts.append((draft, declared, text_id))
        if flagged:
            flagged_train.append((draft, declared, text_id))

    n_dups = round(cfg.n_test * cfg.near_dup_rate)
    for i in range(cfg.n_test):
        text_id = f"test-{i:04d}"
        if i < n_dups and flagged_train:
            source_draft, declared, source_id = gen.rng.choice(flagged_train)
            draft = gen._near_dup(source_draft)
            record = gen._to_record(draft, text_id, declared)
            expectation = TestExpectation(
                text_id=text_id,
                flag=True,
                error_index=record.gold_error_index,
                corrected_sentence=record.gold_corrected_sentence,
                near_dup=True,
                source_text_id=source_id,
            )
        else:
            flagged = gen.rng.random() < cfg.error_rate
            draft = gen._draft_record(flagged)
            declared = gen._declared_indices(len(draft.sentences))
            record = gen._to_record(draft, text_id, declared)
            expectation = TestExpectation(
                text_id=text_id,
                flag=bool(record.gold_flag),
                error_index=record.gold_error_index,
                corrected_sentence=record.gold_corrected_sentence or NO_CORRECTION,
                near_dup=False,
            )
        corpus.test.append(record)
        corpus.expectations[text_id] = expectation
    return corpus


def write_corpus(
    corpus: SyntheticCorpus,
    train_path: str | Path,
    test_path: str | Path,
    schema: ColumnSchema | None = None,
) -> None:
    write_dataset(corpus.train, train_path, schema)
    write_dataset(corpus.test, test_path, schema)
