"""Similarity features and the softmax link distribution over candidates.

The feature vector for a (query, candidate) pair is laid out as

    [h_x * h_P | |h_x - h_P| | f_cos | f_mpcos (k values) | f_r (event mode)]

where f_r is the aggregated argument-coreference embedding.  A single
weight vector maps every candidate's features to one logit, and the
link distribution is the softmax over candidates with the singleton
candidate always occupying the last index.
"""

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import cosine  # re-exported: scorer.cosine is the public name
from .corpus import Role
from .errors import DimMismatch, UnknownEntityMention

__all__ = [
    "cosine",
    "mp_cosine",
    "arg_coref_feature",
    "feature_vector",
    "score_candidates",
    "predict_link",
    "LinkDistribution",
]


def mp_cosine(a, b, projections):
    """Cosine similarity of a and b in each learned projection space."""
    av, bv = ad.value(a), ad.value(b)
    out = []
    for w in projections:
        wv = ad.value(w)
        if wv.shape[1] != av.shape[0] or av.shape != bv.shape:
            raise DimMismatch(
                f"projection {wv.shape} incompatible with vectors "
                f"{av.shape} / {bv.shape}"
            )
        out.append(ad.cosine(ad.matvec(w, a), ad.matvec(w, b)))
    return out


def arg_coref_feature(query_args, candidate_args_list, entity_clustering, f_emb):
    """Aggregated argument-coreference embedding for one candidate.

    `query_args` maps roles to entity mention ids for the query event;
    `candidate_args_list` holds one such map per member event of the
    candidate cluster.  For each role filled on both sides the indicator
    is 1 when the query's filler corefers with the same-role filler of
    any member event.  The feature is the mean of the selected indicator
    embeddings, or a zero vector when no role is shared.
    """
    d_f = ad.value(f_emb[0]).shape[0]
    chosen = []
    for role in Role:
        q = query_args.get(role)
        if q is None:
            continue
        fillers = [args[role] for args in candidate_args_list if role in args]
        if not fillers:
            continue
        if q not in entity_clustering:
            raise UnknownEntityMention(f"entity mention '{q}' not in entity clustering")
        qc = entity_clustering[q]
        agree = 0
        for filler in fillers:
            if filler not in entity_clustering:
                raise UnknownEntityMention(
                    f"entity mention '{filler}' not in entity clustering"
                )
            if entity_clustering[filler] == qc:
                agree = 1
                break
        chosen.append(f_emb[agree])
    if not chosen:
        return np.zeros(d_f)
    return ad.mean_n(chosen)


def feature_vector(h_x, h_p, f_cos, f_mp, f_r=None):
    """Concatenate the similarity features in the fixed layout."""
    if ad.value(h_x).shape != ad.value(h_p).shape:
        raise DimMismatch(
            f"query {ad.value(h_x).shape} vs candidate {ad.value(h_p).shape}"
        )
    parts = [
        ad.mul(h_x, h_p),
        ad.abs_(ad.sub(h_x, h_p)),
        ad.stack([f_cos]),
        ad.stack(f_mp),
    ]
    if f_r is not None:
        parts.append(f_r)
    return ad.concat(parts)


@dataclass
class LinkDistribution:
    """Softmax probabilities over candidates; the singleton is last."""

    probs: np.ndarray
    logits: object  # (m,) array or autodiff Tensor, kept for the trainer

    def __len__(self):
        return len(self.probs)


def score_candidates(features, params):
    """One shared-weight logit per candidate, then a stable softmax."""
    w_dim = ad.value(params.w_o).shape[0]
    logit_list = []
    for f in features:
        if ad.value(f).shape != (w_dim,):
            raise DimMismatch(
                f"feature vector has shape {ad.value(f).shape}, expected ({w_dim},)"
            )
        logit_list.append(ad.add(ad.dot(params.w_o, f), params.b_o))
    logits = ad.stack(logit_list)
    return LinkDistribution(probs=ad.softmax(logits), logits=logits)


def predict_link(dist):
    """Index of the most probable candidate; ties go to the oldest cluster."""
    return int(np.argmax(dist.probs))
