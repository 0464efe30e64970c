"""Incrementally composed candidate cluster representations.

A cluster keeps the running (sum, count) of its members' contextualized
vectors; the representation is their arithmetic mean, so incremental
updates are exact.  During training the sum may mix plain arrays
(contributions from earlier documents, held constant) with autodiff
tensors (contributions from the document currently forming a batch).
"""

import numpy as np

from . import autodiff as ad
from .errors import DimMismatch, DuplicateMention, UnknownCluster


def contextualize(h_x, h_ctx, params):
    """Blend a mention with its document context: tanh(W_x h_x + W_cls h_ctx + b_c)."""
    d = ad.value(params.b_c).shape[0]
    if ad.value(h_x).shape != (d,) or ad.value(h_ctx).shape != (d,):
        raise DimMismatch(
            f"contextualize expects dim {d}, got {ad.value(h_x).shape} "
            f"and {ad.value(h_ctx).shape}"
        )
    pre = ad.add(ad.add(ad.matvec(params.W_x, h_x), ad.matvec(params.W_cls, h_ctx)),
                 params.b_c)
    return ad.tanh(pre)


def lift_context(doc_ctx):
    """Lift a d_tok context vector into mention space by self-concatenation."""
    return np.concatenate([np.asarray(doc_ctx), np.asarray(doc_ctx)])


def singleton_candidate(doc_ctx):
    """Representation of the start-a-new-cluster candidate."""
    return lift_context(doc_ctx)


class Cluster:
    __slots__ = ("cluster_id", "topic_id", "members", "sum_vec", "count")

    def __init__(self, cluster_id, h_c, mention_id, topic_id=None):
        self.cluster_id = cluster_id
        self.topic_id = topic_id
        self.members = [mention_id]
        self.sum_vec = h_c
        self.count = 1

    @property
    def rep(self):
        return ad.scale(self.sum_vec, 1.0 / self.count)


class ClusterState:
    """The evolving partition over processed mentions."""

    def __init__(self):
        self.clusters = []
        self.assignment = {}

    def __len__(self):
        return len(self.clusters)

    def cluster(self, cluster_id):
        if not (0 <= cluster_id < len(self.clusters)):
            raise UnknownCluster(f"no cluster {cluster_id}")
        return self.clusters[cluster_id]

    def new_cluster(self, h_c, mention_id, topic_id=None):
        if mention_id in self.assignment:
            raise DuplicateMention(f"mention '{mention_id}' already clustered")
        cid = len(self.clusters)
        self.clusters.append(Cluster(cid, h_c, mention_id, topic_id))
        self.assignment[mention_id] = cid
        return cid

    def add_member(self, cluster_id, h_c, mention_id):
        if mention_id in self.assignment:
            raise DuplicateMention(f"mention '{mention_id}' already clustered")
        c = self.cluster(cluster_id)
        c.sum_vec = ad.add(c.sum_vec, h_c)
        c.count += 1
        c.members.append(mention_id)
        self.assignment[mention_id] = cluster_id

    def rep(self, cluster_id):
        return self.cluster(cluster_id).rep

    def detach(self):
        """Replace any graph-valued sums with their plain arrays."""
        for c in self.clusters:
            c.sum_vec = np.array(ad.value(c.sum_vec), dtype=np.float64)

    def clone(self):
        """Independent copy; graph-valued sums are detached in the copy."""
        out = ClusterState()
        out.assignment = dict(self.assignment)
        for c in self.clusters:
            cc = Cluster(c.cluster_id, np.array(ad.value(c.sum_vec), dtype=np.float64),
                         c.members[0], c.topic_id)
            cc.members = list(c.members)
            cc.count = c.count
            out.clusters.append(cc)
        return out
