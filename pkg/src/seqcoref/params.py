"""Model configuration, trainable tensors, and checkpoint persistence.

Checkpoint layout: a u32 manifest length, a JSON manifest holding the
config plus tensor names/shapes/element-offsets, then one contiguous
little-endian float32 blob covering all tensors in manifest order.
"""

import json
import struct
from dataclasses import asdict, dataclass, fields
from types import SimpleNamespace

import numpy as np

from .autodiff import Tensor
from .corpus import ENTITY, EVENT, KINDS
from .errors import ManifestCorrupt, ShapeMismatch

_U32 = struct.Struct("<I")


@dataclass
class Config:
    d_tok: int = 768
    d_arg: int = 128
    d_f: int = 50
    k: int = 0  # 0 = pick the mode default (1 entity, 3 event)
    d_p: int = 50
    mode: str = ENTITY
    K_topics: int = 20
    learning_rate: float = 1e-3
    clip_norm: float = 30.0
    max_epochs: int = 80
    patience: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.mode not in KINDS:
            raise ValueError(f"unknown mode '{self.mode}'")
        if self.k == 0:
            self.k = 1 if self.mode == ENTITY else 3
        for name in ("d_tok", "d_arg", "d_f", "k", "d_p", "K_topics", "max_epochs"):
            if getattr(self, name) <= 0:
                raise ValueError(f"config field {name} must be positive")
        if self.patience < 0:
            raise ValueError("patience must be >= 0")

    @property
    def d_m(self):
        return 2 * self.d_tok

    @property
    def feature_dim(self):
        base = 2 * self.d_m + 1 + self.k
        return base + self.d_f if self.mode == EVENT else base

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return cls(**data)


def param_spec(config):
    """Ordered (name, shape, fan_in) for every trainable tensor."""
    d_m, d_arg, d_f = config.d_m, config.d_arg, config.d_f
    spec = [
        ("W_a", (d_m, d_m + 2 * d_arg), d_m + 2 * d_arg),
        ("b_a", (d_m,), d_m + 2 * d_arg),
        ("W_x", (d_m, d_m), d_m),
        ("W_cls", (d_m, d_m), d_m),
        ("b_c", (d_m,), d_m),
        ("W_p", (config.k, config.d_p, d_m), d_m),
        ("lstm_fw_W", (4 * d_arg, d_m), d_m),
        ("lstm_fw_U", (4 * d_arg, d_arg), d_arg),
        ("lstm_fw_b", (4 * d_arg,), d_arg),
        ("lstm_bw_W", (4 * d_arg, d_m), d_m),
        ("lstm_bw_U", (4 * d_arg, d_arg), d_arg),
        ("lstm_bw_b", (4 * d_arg,), d_arg),
        ("f_emb", (2, d_f), d_f),
        ("w_o", (config.feature_dim,), config.feature_dim),
        ("b_o", (), config.feature_dim),
    ]
    return spec


class ModelParams:
    """All trainable tensors, stored as float32 arrays keyed by name."""

    def __init__(self, tensors):
        self._tensors = {k: np.asarray(v, dtype=np.float32) for k, v in tensors.items()}

    def __getattr__(self, name):
        try:
            return self._tensors[name]
        except KeyError:
            raise AttributeError(name)

    def items(self):
        return list(self._tensors.items())

    def names(self):
        return list(self._tensors)

    @classmethod
    def zeros(cls, config):
        return cls({n: np.zeros(s, np.float32) for n, s, _ in param_spec(config)})

    @classmethod
    def init(cls, config, seed=None):
        """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialization."""
        rng = np.random.default_rng(config.seed if seed is None else seed)
        tensors = {}
        for name, shape, fan_in in param_spec(config):
            bound = 1.0 / np.sqrt(fan_in)
            tensors[name] = rng.uniform(-bound, bound, size=shape).astype(np.float32)
        return cls(tensors)

    def as_namespace(self, dtype=np.float64):
        """Plain-array view for the inference path (promoted to `dtype`)."""
        ns = SimpleNamespace()
        for name, arr in self._tensors.items():
            setattr(ns, name, arr.astype(dtype))
        return ns

    def as_tensor_namespace(self):
        """Autodiff view: stacked perspective/feature tensors become lists so
        the forward code can index them without a slicing op."""
        ns = SimpleNamespace()
        for name, arr in self._tensors.items():
            a64 = arr.astype(np.float64)
            if name in ("W_p", "f_emb"):
                setattr(ns, name, [Tensor(a64[i]) for i in range(a64.shape[0])])
            else:
                setattr(ns, name, Tensor(a64))
        return ns

    def validate_shapes(self, config):
        spec = param_spec(config)
        names = [n for n, _, _ in spec]
        if names != self.names():
            raise ShapeMismatch(
                f"tensor set {self.names()} does not match config ({names})"
            )
        for name, shape, _ in spec:
            if self._tensors[name].shape != shape:
                raise ShapeMismatch(
                    f"tensor {name}: shape {self._tensors[name].shape} != {shape}"
                )


def save_checkpoint(params, config, path):
    names = params.names()
    tensors = []
    offset = 0
    for name in names:
        arr = getattr(params, name)
        tensors.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += arr.size
    manifest = json.dumps(
        {"format": "seqcoref-checkpoint", "version": 1,
         "config": config.to_dict(), "tensors": tensors}
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_U32.pack(len(manifest)))
        fh.write(manifest)
        for name in names:
            fh.write(getattr(params, name).astype("<f4").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _U32.size:
        raise ManifestCorrupt(f"{path}: missing manifest length")
    (mlen,) = _U32.unpack_from(buf, 0)
    if _U32.size + mlen > len(buf):
        raise ManifestCorrupt(f"{path}: manifest overruns file")
    try:
        manifest = json.loads(buf[_U32.size : _U32.size + mlen].decode("utf-8"))
        config = Config.from_dict(manifest["config"])
        entries = manifest["tensors"]
    except (ValueError, KeyError, TypeError) as e:
        raise ManifestCorrupt(f"{path}: unreadable manifest: {e}")
    blob = np.frombuffer(buf, dtype="<f4", offset=_U32.size + mlen)
    spec = param_spec(config)
    if len(entries) != len(spec):
        raise ShapeMismatch(
            f"{path}: manifest lists {len(entries)} tensors, config implies {len(spec)}"
        )
    tensors = {}
    total = 0
    for entry in entries:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape)) if shape else 1
        off = entry["offset"]
        if off + size > blob.size:
            raise ShapeMismatch(f"{path}: tensor {entry['name']} overruns blob")
        tensors[entry["name"]] = blob[off : off + size].reshape(shape).copy()
        total += size
    if total != blob.size:
        raise ShapeMismatch(
            f"{path}: blob holds {blob.size} values, manifest covers {total}"
        )
    params = ModelParams(tensors)
    params.validate_shapes(config)
    return params, config
