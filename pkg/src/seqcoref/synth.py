"""Deterministic synthetic corpora with known clusters and topics.

Geometry: every gold cluster owns a centroid on the sphere of radius
`separation`; mention span token vectors are that centroid plus unit
Gaussian noise, document context vectors are the topic centroid plus
noise, and filler tokens are pure noise.  Token strings draw mostly from
a topic-specific vocabulary so TF-IDF topic clustering has signal.

In event mode clusters come in close centroid pairs whose members are
told apart by argument coreference: the argument entities of an event
belong to per-role entity clusters indexed by the event cluster's
parity, so two events corefer only if their same-role arguments do.
"""

from dataclasses import dataclass

import numpy as np

from .corpus import ENTITY, EVENT, Role, corpus_from_records, write_corpus
from .embeddings import EmbeddingStore, write_embeddings
from .errors import InfeasibleConfig
from .files import write_topics

_TOPIC_VOCAB = 12
_SHARED_VOCAB = 8
_TOPIC_WORD_RATE = 0.85
_NOISE_SIGMA = 1.0
# document context vectors are near-canonical topic summaries; keeping their
# noise well below the mention noise makes the new-cluster decision learnable
_CTX_NOISE_SIGMA = 0.1


@dataclass
class SynthConfig:
    n_topics: int = 2
    docs_per_topic: int = 10
    clusters_per_topic: int = 8
    mentions_per_doc: int = 6
    d_tok: int = 16
    separation: float = 8.0
    event_mode: bool = False
    args_per_event: int = 1
    seed: int = 0
    # cluster/topic centroids derive from this; two corpora generated with
    # the same world_seed but different seeds share entities and topics
    # while their documents differ (the held-out/streaming setting)
    world_seed: int | None = None

    def validate(self):
        for name in ("n_topics", "docs_per_topic", "clusters_per_topic",
                     "mentions_per_doc", "d_tok", "args_per_event"):
            if getattr(self, name) <= 0:
                raise InfeasibleConfig(f"{name} must be positive")
        if self.separation < 0:
            raise InfeasibleConfig("separation must be nonnegative")
        if self.clusters_per_topic > self.docs_per_topic * self.mentions_per_doc:
            raise InfeasibleConfig(
                f"{self.clusters_per_topic} clusters cannot be covered by "
                f"{self.docs_per_topic * self.mentions_per_doc} mentions"
            )
        if self.event_mode and self.args_per_event > len(Role):
            raise InfeasibleConfig(f"at most {len(Role)} argument roles exist")


@dataclass
class SynthResult:
    corpus: object
    store: EmbeddingStore
    gold_topics: dict

    def write_files(self, out_dir):
        """Emit corpus.jsonl, embeddings.xemb, and topics.jsonl."""
        import os

        os.makedirs(out_dir, exist_ok=True)
        corpus_path = os.path.join(out_dir, "corpus.jsonl")
        emb_path = os.path.join(out_dir, "embeddings.xemb")
        topics_path = os.path.join(out_dir, "topics.jsonl")
        write_corpus(self.corpus.documents, corpus_path)
        write_embeddings(self.store, emb_path)
        write_topics(self.gold_topics, topics_path)
        return corpus_path, emb_path, topics_path


def _unit(rng, dim):
    v = rng.normal(size=dim)
    n = np.linalg.norm(v)
    return v / n if n > 0 else v


def _sphere_point(rng, dim, radius):
    return _unit(rng, dim) * radius


class _DocBuilder:
    """Accumulates tokens, mention records, and per-token vectors."""

    def __init__(self, rng, cfg, topic, doc_id):
        self.rng = rng
        self.cfg = cfg
        self.topic = topic
        self.doc_id = doc_id
        self.tokens = []
        self.vectors = []
        self.mentions = []
        self._counter = 0

    def _word(self):
        if self.rng.random() < _TOPIC_WORD_RATE:
            return f"t{self.topic}_w{int(self.rng.integers(_TOPIC_VOCAB))}"
        return f"sh_w{int(self.rng.integers(_SHARED_VOCAB))}"

    def filler(self, n):
        for _ in range(n):
            self.tokens.append(self._word())
            self.vectors.append(self.rng.normal(0.0, _NOISE_SIGMA, self.cfg.d_tok))

    def mention(self, kind, centroid, gold, entity_type=None, args=None):
        length = int(self.rng.integers(1, 3))
        start = len(self.tokens)
        for _ in range(length):
            self.tokens.append(self._word())
            self.vectors.append(
                centroid + self.rng.normal(0.0, _NOISE_SIGMA, self.cfg.d_tok)
            )
        mid = f"{self.doc_id}_m{self._counter}"
        self._counter += 1
        rec = {
            "mention_id": mid,
            "kind": kind,
            "start": start,
            "end": start + length - 1,
            "gold_cluster": gold,
        }
        if entity_type is not None:
            rec["entity_type"] = entity_type
        if args:
            rec["args"] = args
        self.mentions.append(rec)
        return mid

    def record(self):
        return {
            "doc_id": self.doc_id,
            "topic_gold": f"topic{self.topic}",
            "tokens": self.tokens,
            "mentions": self.mentions,
        }


_ROLE_TYPES = {Role.ARG0: "OTHER", Role.ARG1: "OTHER",
               Role.TIME: "TIME", Role.LOC: "LOC"}


def _event_centroids(rng, cfg):
    """Cluster centroids in close pairs; pair members differ by parity."""
    delta = cfg.separation / 8.0
    centroids = []
    for _ in range((cfg.clusters_per_topic + 1) // 2):
        base = _sphere_point(rng, cfg.d_tok, cfg.separation)
        offset = _unit(rng, cfg.d_tok) * delta
        centroids.append(base + offset)
        centroids.append(base - offset)
    return centroids[: cfg.clusters_per_topic]


def generate(cfg):
    """Build a synthetic corpus, embeddings, and gold topics from `cfg`."""
    cfg.validate()
    rng = np.random.default_rng(cfg.seed)
    world_seed = cfg.seed if cfg.world_seed is None else cfg.world_seed
    rng_world = np.random.default_rng((world_seed, 1))
    kind = EVENT if cfg.event_mode else ENTITY
    roles = list(Role)[: cfg.args_per_event]

    records = []
    store = EmbeddingStore(cfg.d_tok)
    gold_topics = {}
    for topic in range(cfg.n_topics):
        topic_centroid = _sphere_point(rng_world, cfg.d_tok, cfg.separation)
        if cfg.event_mode:
            centroids = _event_centroids(rng_world, cfg)
            arg_centroids = {
                (role, parity): _sphere_point(rng_world, cfg.d_tok, cfg.separation)
                for role in roles
                for parity in (0, 1)
            }
        else:
            centroids = [
                _sphere_point(rng_world, cfg.d_tok, cfg.separation)
                for _ in range(cfg.clusters_per_topic)
            ]
        for di in range(cfg.docs_per_topic):
            doc_id = f"t{topic}_d{di:03d}"
            gold_topics[doc_id] = f"topic{topic}"
            b = _DocBuilder(rng, cfg, topic, doc_id)
            for i in range(cfg.mentions_per_doc):
                ci = (di + i) % cfg.clusters_per_topic
                gold = f"t{topic}_c{ci}"
                b.filler(int(rng.integers(1, 4)))
                if cfg.event_mode:
                    parity = ci % 2
                    trigger_index = len(b.mentions)
                    b.mention(EVENT, centroids[ci], gold)
                    trigger_args = []
                    for role in roles:
                        b.filler(1)
                        arg_id = b.mention(
                            ENTITY,
                            arg_centroids[(role, parity)],
                            f"t{topic}_{role.name}_p{parity}",
                            entity_type=_ROLE_TYPES[role],
                        )
                        trigger_args.append({"role": role.name, "mention_id": arg_id})
                    b.mentions[trigger_index]["args"] = trigger_args
                else:
                    b.mention(ENTITY, centroids[ci], gold)
            b.filler(int(rng.integers(1, 4)))
            records.append(b.record())
            store.add(
                doc_id,
                topic_centroid + rng.normal(0.0, _CTX_NOISE_SIGMA, cfg.d_tok),
                np.array(b.vectors),
            )

    corpus = corpus_from_records(
        ((i + 1, r) for i, r in enumerate(records)), mode=kind
    )
    return SynthResult(corpus=corpus, store=store, gold_topics=gold_topics)
