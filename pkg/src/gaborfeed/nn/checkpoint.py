"""Single-file network checkpoints.

Layout (all integers little-endian)::

    8 bytes   magic  b"GBFDCKPT"
    uint32    format version (1)
    uint32    header length N
    N bytes   UTF-8 JSON header:
                {"input_shape": [...], "seed": int, "step": int,
                 "layers": [{"type": "Conv2D", <spec fields>}, ...],
                 "params": [[[name, shape], ...], ...],   # per layer, blob order
                 "meta": {...}}
    blobs     float64 little-endian, C order, layer by layer in the order
              listed under "params"

Reading a file and writing it back yields identical bytes.
"""

from __future__ import annotations

import dataclasses
import json
import struct

import numpy as np

from .._io import atomic_write
from .layers import LAYER_TYPES
from .network import Network

MAGIC = b"GBFDCKPT"
VERSION = 1


def to_bytes(net: Network, meta: dict | None = None) -> bytes:
    if not net.built:
        raise ValueError("cannot checkpoint an unbuilt network")
    layers = [{"type": type(l).__name__, **dataclasses.asdict(l)} for l in net.layers]
    pnames = [[[k, list(v.shape)] for k, v in p.items()] for p in net.params]
    header = {"input_shape": list(net.input_shape), "seed": net.seed, "step": net.step,
              "layers": layers, "params": pnames, "meta": meta or {}}
    hb = json.dumps(header, sort_keys=True).encode("utf-8")
    blobs = b"".join(np.ascontiguousarray(v, dtype="<f8").tobytes()
                     for p in net.params for v in p.values())
    return MAGIC + struct.pack("<II", VERSION, len(hb)) + hb + blobs


def from_bytes(data: bytes):
    if data[:8] != MAGIC:
        raise ValueError("not a checkpoint (bad magic)")
    version, hlen = struct.unpack_from("<II", data, 8)
    if version != VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    header = json.loads(data[16:16 + hlen].decode("utf-8"))
    layers = []
    for spec in header["layers"]:
        spec = dict(spec)
        cls = LAYER_TYPES[spec.pop("type")]
        layers.append(cls(**spec))
    net = Network(layers, seed=header["seed"])
    net.build(header["input_shape"])
    off = 16 + hlen
    for p, names in zip(net.params, header["params"]):
        for name, shape in names:
            n = int(np.prod(shape))
            if off + 8 * n > len(data):
                raise ValueError("truncated checkpoint")
            p[name] = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(shape).astype(np.float64)
            off += 8 * n
    if off != len(data):
        raise ValueError("trailing bytes in checkpoint")
    net.step = header["step"]
    net.touch()
    return net, header["meta"]


def save(net: Network, path, meta: dict | None = None):
    atomic_write(path, to_bytes(net, meta))


def load(path):
    with open(path, "rb") as f:
        return from_bytes(f.read())
