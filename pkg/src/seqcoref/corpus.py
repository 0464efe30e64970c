"""Corpus domain types and line-delimited JSON ingestion.

Corpus file format: one JSON object per line, one document per object.

    {"doc_id": "d1", "topic_gold": "t0", "tokens": ["..."],
     "mentions": [{"mention_id": "d1_m0", "kind": "entity",
                   "start": 0, "end": 1, "gold_cluster": "c3",
                   "entity_type": "OTHER",
                   "args": [{"role": "ARG0", "mention_id": "d1_m1"}]}]}

`topic_gold`, `gold_cluster`, `entity_type` and `args` are optional.
Events carry `args` (role -> same-document entity mention); an entity's
event participation is derived from the event records at load time.
Mention ids must be unique across the whole corpus because downstream
prediction files identify mentions by id alone.
"""

import json
from dataclasses import dataclass, field
from enum import IntEnum

from .errors import (
    DanglingArgumentRef,
    DuplicateDocId,
    MalformedRecord,
    MissingGold,
)

ENTITY = "entity"
EVENT = "event"
KINDS = (ENTITY, EVENT)

ENTITY_TYPES = ("PERSON", "ORG", "TIME", "LOC", "OTHER")


class Role(IntEnum):
    """Argument roles; integer codes are stable for serialization."""

    ARG0 = 0
    ARG1 = 1
    TIME = 2
    LOC = 3


@dataclass(frozen=True)
class Mention:
    mention_id: str
    kind: str
    start: int
    end: int
    gold_cluster: str | None = None
    entity_type: str | None = None
    # events: (role, entity mention_id); at most one filler per role
    args: tuple = ()
    # entities: (event trigger mention_id, role), derived at load time
    events_participated: tuple = ()

    def args_by_role(self):
        return {role: mid for role, mid in self.args}


@dataclass
class Document:
    doc_id: str
    tokens: list
    mentions: list
    topic_gold: str | None = None

    def mentions_of(self, kind):
        return [m for m in self.mentions if m.kind == kind]


class Clustering:
    """A total map mention_id -> dense nonnegative cluster id."""

    def __init__(self, mapping):
        self.mapping = dict(mapping)

    @classmethod
    def from_labels(cls, pairs):
        """Build from (mention_id, arbitrary label) pairs, relabeling densely
        in order of first appearance."""
        ids = {}
        mapping = {}
        for mention_id, label in pairs:
            if label not in ids:
                ids[label] = len(ids)
            mapping[mention_id] = ids[label]
        return cls(mapping)

    def __len__(self):
        return len(self.mapping)

    def __contains__(self, mention_id):
        return mention_id in self.mapping

    def __getitem__(self, mention_id):
        return self.mapping[mention_id]

    def get(self, mention_id, default=None):
        return self.mapping.get(mention_id, default)

    def mentions(self):
        return set(self.mapping)

    def clusters(self):
        """cluster id -> frozenset of mention ids."""
        out = {}
        for m, c in self.mapping.items():
            out.setdefault(c, set()).add(m)
        return {c: frozenset(ms) for c, ms in out.items()}

    def __eq__(self, other):
        if not isinstance(other, Clustering):
            return NotImplemented
        return set(self.clusters().values()) == set(other.clusters().values())


@dataclass
class Corpus:
    documents: list
    mode: str = ENTITY
    arg_warnings: int = 0
    _by_doc: dict = field(default_factory=dict, repr=False)
    _by_mention: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_doc = {d.doc_id: d for d in self.documents}
        self._by_mention = {
            m.mention_id: (d, m) for d in self.documents for m in d.mentions
        }

    def document(self, doc_id):
        return self._by_doc[doc_id]

    def doc_ids(self):
        return [d.doc_id for d in self.documents]

    def find_mention(self, mention_id):
        """(Document, Mention) for a corpus-unique mention id."""
        return self._by_mention[mention_id]

    def mentions_of(self, kind):
        for d in self.documents:
            for m in d.mentions_of(kind):
                yield d, m

    def gold_clustering(self, kind):
        """Gold clustering over annotated mentions of `kind`."""
        pairs = [
            (m.mention_id, m.gold_cluster)
            for _, m in self.mentions_of(kind)
            if m.gold_cluster is not None
        ]
        if not pairs:
            raise MissingGold(f"no gold cluster annotations for kind '{kind}'")
        return Clustering.from_labels(pairs)

    def gold_topics(self):
        return {d.doc_id: d.topic_gold for d in self.documents if d.topic_gold}


def _req(record, key, types, line):
    if key not in record:
        raise MalformedRecord(f"missing field '{key}'", line)
    v = record[key]
    if not isinstance(v, types):
        raise MalformedRecord(f"field '{key}' has wrong type", line)
    return v


def _parse_mention(raw, n_tokens, line):
    mid = _req(raw, "mention_id", str, line)
    kind = _req(raw, "kind", str, line)
    if kind not in KINDS:
        raise MalformedRecord(f"mention {mid}: unknown kind '{kind}'", line)
    start = _req(raw, "start", int, line)
    end = _req(raw, "end", int, line)
    if not (0 <= start <= end < n_tokens):
        raise MalformedRecord(
            f"mention {mid}: span ({start}, {end}) outside 0..{n_tokens - 1}", line
        )
    gold = raw.get("gold_cluster")
    if gold is not None and not isinstance(gold, str):
        raise MalformedRecord(f"mention {mid}: gold_cluster must be a string", line)
    etype = raw.get("entity_type")
    if kind == ENTITY:
        etype = etype or "OTHER"
        if etype not in ENTITY_TYPES:
            raise MalformedRecord(f"mention {mid}: bad entity_type '{etype}'", line)
    elif etype is not None:
        raise MalformedRecord(f"event mention {mid} must not carry entity_type", line)
    raw_args = raw.get("args") or []
    if kind == ENTITY and raw_args:
        raise MalformedRecord(f"entity mention {mid} must not carry args", line)
    args = []
    seen_roles = set()
    for a in raw_args:
        role_name = _req(a, "role", str, line)
        try:
            role = Role[role_name]
        except KeyError:
            raise MalformedRecord(f"mention {mid}: unknown role '{role_name}'", line)
        if role in seen_roles:
            raise MalformedRecord(f"mention {mid}: duplicate role {role_name}", line)
        seen_roles.add(role)
        args.append((role, _req(a, "mention_id", str, line)))
    return mid, kind, start, end, gold, etype, args


def _parse_document(record, line):
    doc_id = _req(record, "doc_id", str, line)
    tokens = _req(record, "tokens", list, line)
    if not all(isinstance(t, str) for t in tokens):
        raise MalformedRecord("tokens must be strings", line)
    topic = record.get("topic_gold")
    if topic is not None and not isinstance(topic, str):
        raise MalformedRecord("topic_gold must be a string", line)

    parsed = {}
    order = []
    for raw in _req(record, "mentions", list, line):
        mid, kind, start, end, gold, etype, args = _parse_mention(
            raw, len(tokens), line
        )
        if mid in parsed:
            raise MalformedRecord(f"duplicate mention_id '{mid}'", line)
        parsed[mid] = dict(
            kind=kind, start=start, end=end, gold=gold, etype=etype, args=args
        )
        order.append(mid)
    return doc_id, tokens, topic, parsed, order


def _apply_type_constraint(doc_id, parsed):
    """Drop event arguments whose entity type conflicts with a typed role.

    Entities of type TIME may only fill the TIME role and LOC entities the
    LOC role (and vice versa).  Returns the number of dropped arguments.
    """
    dropped = 0
    for mid, m in parsed.items():
        if m["kind"] != EVENT:
            continue
        kept = []
        for role, ref in m["args"]:
            if ref not in parsed or parsed[ref]["kind"] != ENTITY:
                raise DanglingArgumentRef(
                    f"doc {doc_id}: event {mid} argument '{ref}' is not a "
                    f"same-document entity mention"
                )
            etype = parsed[ref]["etype"]
            role_ok = (
                (role == Role.TIME) == (etype == "TIME")
                and (role == Role.LOC) == (etype == "LOC")
            )
            if role_ok:
                kept.append((role, ref))
            else:
                dropped += 1
        m["args"] = kept
    return dropped


def _build_document(doc_id, tokens, topic, parsed, order):
    participation = {mid: [] for mid in order}
    for mid in order:
        m = parsed[mid]
        if m["kind"] == EVENT:
            for role, ref in m["args"]:
                participation[ref].append((mid, role))
    mentions = []
    for mid in order:
        m = parsed[mid]
        mentions.append(
            Mention(
                mention_id=mid,
                kind=m["kind"],
                start=m["start"],
                end=m["end"],
                gold_cluster=m["gold"],
                entity_type=m["etype"],
                args=tuple(m["args"]),
                events_participated=tuple(participation[mid]),
            )
        )
    mentions.sort(key=lambda m: (m.start, m.end))
    return Document(doc_id=doc_id, tokens=tokens, mentions=mentions, topic_gold=topic)


def corpus_from_records(records, mode=ENTITY):
    """Validate an iterable of (line_no, record-dict) pairs into a Corpus.

    Event arguments violating the TIME/LOC type constraint are dropped; the
    total drop count is reported on the returned corpus as `arg_warnings`.
    """
    if mode not in KINDS:
        raise MalformedRecord(f"unknown mode '{mode}'")
    documents = []
    seen_docs = set()
    seen_mentions = set()
    warnings = 0
    for line_no, record in records:
        if not isinstance(record, dict):
            raise MalformedRecord("document record must be an object", line_no)
        doc_id, tokens, topic, parsed, order = _parse_document(record, line_no)
        if doc_id in seen_docs:
            raise DuplicateDocId(f"doc_id '{doc_id}' appears twice")
        seen_docs.add(doc_id)
        for mid in order:
            if mid in seen_mentions:
                raise MalformedRecord(
                    f"mention_id '{mid}' reused across documents", line_no
                )
            seen_mentions.add(mid)
        warnings += _apply_type_constraint(doc_id, parsed)
        documents.append(_build_document(doc_id, tokens, topic, parsed, order))
    return Corpus(documents=documents, mode=mode, arg_warnings=warnings)


def load_corpus(path, mode=ENTITY):
    """Load and validate a line-delimited corpus file."""

    def records():
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield line_no, json.loads(line)
                except json.JSONDecodeError as e:
                    raise MalformedRecord(f"invalid JSON ({e.msg})", line_no)

    return corpus_from_records(records(), mode)


def document_to_record(doc):
    """Inverse of the parser, for writing corpus files."""
    mentions = []
    for m in doc.mentions:
        rec = {
            "mention_id": m.mention_id,
            "kind": m.kind,
            "start": m.start,
            "end": m.end,
        }
        if m.gold_cluster is not None:
            rec["gold_cluster"] = m.gold_cluster
        if m.entity_type is not None:
            rec["entity_type"] = m.entity_type
        if m.args:
            rec["args"] = [
                {"role": role.name, "mention_id": ref} for role, ref in m.args
            ]
        mentions.append(rec)
    record = {"doc_id": doc.doc_id, "tokens": list(doc.tokens), "mentions": mentions}
    if doc.topic_gold is not None:
        record["topic_gold"] = doc.topic_gold
    return record


def write_corpus(documents, path):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in documents:
            fh.write(json.dumps(document_to_record(doc)) + "\n")
