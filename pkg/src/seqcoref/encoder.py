"""Fixed-size mention representations from span and argument embeddings.

A mention representation is the affine combination of (a) the
concatenated start/end token vectors of its span and (b) a pooled
encoding of its associated structure: the events an entity participates
in, or the argument entities of an event trigger.
"""

import numpy as np

from . import autodiff as ad
from .errors import DimMismatch


def encode_span(start_vec, end_vec):
    """Concatenate the span's start and end token vectors."""
    s, e = ad.value(start_vec), ad.value(end_vec)
    if np.shape(s) != np.shape(e) or np.ndim(s) != 1:
        raise DimMismatch(
            f"span vectors must be equal-length 1-d, got {np.shape(s)} / {np.shape(e)}"
        )
    return ad.concat([start_vec, end_vec])


def _lstm_outputs(xs, W, U, b):
    """Single-layer LSTM over a list of vectors; returns per-step outputs.

    Gate order in the packed weight matrices is [input, forget, cell, output].
    """
    hidden = ad.value(b).shape[0] // 4
    h = np.zeros(hidden)
    c = np.zeros(hidden)
    outputs = []
    for x in xs:
        z = ad.add(ad.add(ad.matvec(W, x), ad.matvec(U, h)), b)
        i = ad.sigmoid(ad.slice_(z, 0, hidden))
        f = ad.sigmoid(ad.slice_(z, hidden, 2 * hidden))
        g = ad.tanh(ad.slice_(z, 2 * hidden, 3 * hidden))
        o = ad.sigmoid(ad.slice_(z, 3 * hidden, 4 * hidden))
        c = ad.add(ad.mul(f, c), ad.mul(i, g))
        h = ad.mul(o, ad.tanh(c))
        outputs.append(h)
    return outputs


def aggregate_args(arg_vecs, params):
    """Bidirectional recurrent encoding of the argument sequence followed by
    mean-pooling over steps.  An empty sequence yields the zero vector."""
    hidden = ad.value(params.lstm_fw_b).shape[0] // 4
    if not arg_vecs:
        return np.zeros(2 * hidden)
    in_dim = ad.value(params.lstm_fw_W).shape[1]
    for v in arg_vecs:
        if ad.value(v).shape != (in_dim,):
            raise DimMismatch(
                f"argument vector has shape {ad.value(v).shape}, expected ({in_dim},)"
            )
    fw = _lstm_outputs(arg_vecs, params.lstm_fw_W, params.lstm_fw_U, params.lstm_fw_b)
    bw = _lstm_outputs(
        list(reversed(arg_vecs)), params.lstm_bw_W, params.lstm_bw_U, params.lstm_bw_b
    )
    bw.reverse()
    steps = [ad.concat([f, b]) for f, b in zip(fw, bw)]
    return ad.mean_n(steps)


def compose_mention(h_span, h_args, params):
    """Affine combination of span and aggregated-argument representations."""
    w = ad.value(params.W_a)
    joined = ad.concat([h_span, h_args])
    if ad.value(joined).shape[0] != w.shape[1]:
        raise DimMismatch(
            f"mention input dim {ad.value(joined).shape[0]} != W_a columns {w.shape[1]}"
        )
    return ad.add(ad.matvec(params.W_a, joined), params.b_a)
