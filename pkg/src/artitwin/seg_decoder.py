"""Reference ``[SEG]``-token segmentation head.

A fused token ``[h_category; h_seg]`` is projected to an attention query; point
features are projected to keys; the scaled dot products are the per-point
logits, squashed with a sigmoid and thresholded into a part mask.  The training
objective (BCE + Dice) is provided with its analytic gradient w.r.t. the
logits.

Tensor files
------------
Two interchangeable containers hold a single float64 array:

* JSON: ``{"shape": [d0, d1, ...], "data": [row-major floats]}``
* binary: magic ``b"ATWT"``, ``uint32`` ndim, ``ndim`` × ``uint32`` dims, then
  row-major little-endian float64 data.

A parameter file is a JSON object ``{"threshold": tau, "W_query": <tensor>,
"W_key": <tensor>}`` with JSON tensors inline.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import DimensionMismatch, ParseError
from .geometry import PartMask

PROB_EPS = 1e-7
DICE_SMOOTH = 1.0
TENSOR_MAGIC = b"ATWT"


@dataclass(frozen=True, eq=False)
class SegDecoderParams:
    """``W_query``: d×2h, ``W_key``: d×p."""

    W_query: np.ndarray
    W_key: np.ndarray
    threshold: float = 0.5

    def __post_init__(self):
        wq = np.array(self.W_query, dtype=np.float64)
        wk = np.array(self.W_key, dtype=np.float64)
        if wq.ndim != 2 or wk.ndim != 2:
            raise DimensionMismatch("weights must be matrices")
        if wq.shape[0] != wk.shape[0]:
            raise DimensionMismatch(f"attention dims differ: {wq.shape[0]} vs {wk.shape[0]}")
        if wq.shape[1] % 2:
            raise DimensionMismatch("W_query input width must be 2h")
        if not (np.all(np.isfinite(wq)) and np.all(np.isfinite(wk))):
            raise ValueError("weights must be finite")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")
        object.__setattr__(self, "W_query", wq)
        object.__setattr__(self, "W_key", wk)

    @property
    def d(self) -> int:
        return self.W_query.shape[0]

    @property
    def h(self) -> int:
        return self.W_query.shape[1] // 2

    @property
    def p(self) -> int:
        return self.W_key.shape[1]

    @classmethod
    def random(cls, h: int = 32, p: int = 16, d: int = 16, seed: int = 0, scale: float = 0.3) -> "SegDecoderParams":
        rng = np.random.default_rng(seed)
        return cls(scale * rng.standard_normal((d, 2 * h)), scale * rng.standard_normal((d, p)))

    @classmethod
    def zeros(cls, h: int = 32, p: int = 16, d: int = 16) -> "SegDecoderParams":
        return cls(np.zeros((d, 2 * h)), np.zeros((d, p)))


@dataclass(frozen=True, eq=False)
class SegTokenPair:
    h_seg: np.ndarray
    h_category: np.ndarray

    def combined(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.h_category, float), np.asarray(self.h_seg, float)])


def query_vector(params: SegDecoderParams, pair: SegTokenPair) -> np.ndarray:
    fused = pair.combined()
    if fused.shape != (2 * params.h,):
        raise DimensionMismatch(f"token states must be {params.h}-vectors")
    return params.W_query @ fused


def score_logits(params: SegDecoderParams, pair: SegTokenPair, feats) -> np.ndarray:
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != params.p:
        raise DimensionMismatch(f"point features must be M×{params.p}, got {feats.shape}")
    keys = feats @ params.W_key.T
    return keys @ query_vector(params, pair) / math.sqrt(params.d)


def score_points(params: SegDecoderParams, pair: SegTokenPair, feats) -> np.ndarray:
    """Per-point membership probabilities ``sigmoid(q . k_i / sqrt(d))``."""
    return expit(score_logits(params, pair, feats))


def binarize(probabilities, tau: float = 0.5, part_name: str = "") -> PartMask:
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    probs = np.asarray(probabilities, dtype=np.float64)
    return PartMask(part_name, tuple(np.flatnonzero(probs >= tau).tolist()))


def _gt_vector(gt, m: int) -> np.ndarray:
    if isinstance(gt, PartMask):
        return gt.as_bool(m).astype(np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if g.shape != (m,):
        raise DimensionMismatch(f"ground-truth mask has shape {g.shape}, expected ({m},)")
    return g


def bce_dice(probabilities, gt, lambda_bce: float = 1.0, lambda_dice: float = 1.0, smooth: float = DICE_SMOOTH):
    """Return ``(loss, bce, dice, dloss/dprob)`` at the clamped probabilities."""
    s = np.asarray(probabilities, dtype=np.float64)
    if s.ndim != 1:
        raise DimensionMismatch("probabilities must be a vector")
    m = _gt_vector(gt, len(s))
    p = np.clip(s, PROB_EPS, 1.0 - PROB_EPS)
    n = len(p)
    bce = -float(np.mean(m * np.log(p) + (1.0 - m) * np.log1p(-p)))
    inter, total = float(p @ m), float(p.sum() + m.sum())
    denom = total + smooth
    dice = 1.0 - (2.0 * inter + smooth) / denom
    d_bce = (-(m / p) + (1.0 - m) / (1.0 - p)) / n
    d_dice = -(2.0 * m * denom - (2.0 * inter + smooth)) / denom**2
    loss = lambda_bce * bce + lambda_dice * dice
    return loss, bce, dice, lambda_bce * d_bce + lambda_dice * d_dice


def seg_loss(probabilities, gt, lambda_bce: float = 1.0, lambda_dice: float = 1.0):
    """BCE + Dice loss and its gradient w.r.t. the pre-sigmoid logits.

    Probabilities are clamped to ``[1e-7, 1 - 1e-7]``; clamped entries get a
    zero gradient, matching the clamped forward pass.
    """
    s = np.asarray(probabilities, dtype=np.float64)
    loss, _, _, d_prob = bce_dice(s, gt, lambda_bce, lambda_dice)
    live = (s > PROB_EPS) & (s < 1.0 - PROB_EPS)
    return loss, d_prob * s * (1.0 - s) * live


def seg_loss_from_logits(logits, gt, lambda_bce: float = 1.0, lambda_dice: float = 1.0):
    return seg_loss(expit(np.asarray(logits, dtype=np.float64)), gt, lambda_bce, lambda_dice)


def total_loss(text_loss: float, seg_losses, lambda_text: float = 1.0, lambda_seg: float = 1.0) -> float:
    if lambda_text < 0 or lambda_seg < 0:
        raise ValueError("loss weights must be non-negative")
    return lambda_text * float(text_loss) + lambda_seg * float(sum(seg_losses))


# ---------------------------------------------------------------------------
# tensor containers


def tensor_to_json(arr) -> dict:
    a = np.asarray(arr, dtype=np.float64)
    return {"shape": list(a.shape), "data": [float(v) for v in a.ravel()]}


def tensor_from_json(obj) -> np.ndarray:
    try:
        shape = [int(s) for s in obj["shape"]]
        data = np.array(obj["data"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad tensor object: {exc}") from None
    if data.size != int(np.prod(shape)):
        raise ParseError(f"tensor data length {data.size} does not match shape {shape}")
    return data.reshape(shape)


def save_tensor(arr, path, binary: bool | None = None) -> None:
    path = Path(path)
    a = np.ascontiguousarray(arr, dtype="<f8")
    if binary is None:
        binary = path.suffix != ".json"
    if binary:
        header = TENSOR_MAGIC + struct.pack(f"<I{a.ndim}I", a.ndim, *a.shape)
        path.write_bytes(header + a.tobytes())
    else:
        path.write_text(json.dumps(tensor_to_json(a)), encoding="utf-8")


def load_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] == TENSOR_MAGIC:
        (ndim,) = struct.unpack_from("<I", raw, 4)
        shape = struct.unpack_from(f"<{ndim}I", raw, 8)
        offset = 8 + 4 * ndim
        count = int(np.prod(shape))
        if len(raw) - offset != 8 * count:
            raise ParseError(f"binary tensor payload size mismatch in {path}")
        return np.frombuffer(raw, dtype="<f8", count=count, offset=offset).reshape(shape).copy()
    try:
        return tensor_from_json(json.loads(raw.decode("utf-8")))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"unreadable tensor file {path}: {exc}") from None


def save_params(params: SegDecoderParams, path) -> None:
    doc = {
        "threshold": params.threshold,
        "W_query": tensor_to_json(params.W_query),
        "W_key": tensor_to_json(params.W_key),
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_params(path) -> SegDecoderParams:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return SegDecoderParams(
        tensor_from_json(doc["W_query"]), tensor_from_json(doc["W_key"]), float(doc.get("threshold", 0.5))
    )


def oracle_decoder(labels, n_parts: int, margin: float = 8.0):
    """Parameters, features and token pairs that reproduce a known labelling.

    ``labels[i]`` is the part index of point ``i`` (``-1`` for none).  Features
    are ``+1`` at the point's own part and ``-1`` elsewhere; the token pair of
    part ``k`` selects feature ``k``, so its logits are ``+-margin``.  Used as a
    stand-in for a trained point encoder when exercising the pipeline.
    """
    labels = np.asarray(labels, dtype=np.int64)
    k = max(int(n_parts), 1)
    feats = -np.ones((len(labels), k))
    owned = labels >= 0
    feats[np.flatnonzero(owned), labels[owned]] = 1.0
    scale = margin * math.sqrt(k)
    W_query = np.hstack([scale * np.eye(k), np.zeros((k, k))])
    params = SegDecoderParams(W_query, np.eye(k))
    pairs = [SegTokenPair(np.zeros(k), np.eye(k)[j]) for j in range(k)]
    return params, feats, pairs
