"""Order-k n-gram model sampled under the grammar mask.

A desk-scale stand-in for an autoregressive sequence model: add-one
smoothing with backoff to shorter contexts, top-k/top-p sampling
(defaults k=50, p=0.95), and a documented integer-state RNG so samples
are reproducible across platforms.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from . import tokens as tk
from .errors import BadMagic, EmptyCorpus

_U64 = 0xFFFFFFFFFFFFFFFF


class SplitMix64:
    """SplitMix64 PRNG (Steele et al. constants), uniform doubles in [0,1)."""

    GAMMA = 0x9E3779B97F4A7C15
    M1 = 0xBF58476D1CE4E5B9
    M2 = 0x94D049BB133111EB

    def __init__(self, seed: int):
        self.state = seed & _U64

    def next_u64(self) -> int:
        self.state = (self.state + self.GAMMA) & _U64
        z = self.state
        z = ((z ^ (z >> 30)) * self.M1) & _U64
        z = ((z ^ (z >> 27)) * self.M2) & _U64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53


@dataclass
class NgramModel:
    order: int
    vocab_size: int = tk.VOCAB_SIZE
    # counts[len(context)][context tuple][next id] for orders 0..order
    counts: dict = field(default_factory=dict)

    def add(self, context: tuple, nxt: int):
        table = self.counts.setdefault(len(context), {}).setdefault(context, {})
        table[nxt] = table.get(nxt, 0) + 1


@dataclass
class SamplerConfig:
    top_k: int = 50
    top_p: float = 0.95
    temperature: float = 1.0
    seed: int = 0
    max_len: int = 4096


def fit(corpus: list, order: int = 3) -> NgramModel:
    """Count (context, next) windows over all orders 0..k, SOS-padded."""
    if not corpus:
        raise EmptyCorpus("no sequences to fit")
    model = NgramModel(order=order)
    for seq in corpus:
        ids = list(seq.ids) if isinstance(seq, tk.TokenSeq) else list(seq)
        padded = [tk.SOS] * order + ids
        for i in range(order, len(padded)):
            for o in range(order + 1):
                model.add(tuple(padded[i - o:i]), padded[i])
    return model


_MASK_CACHE: dict = {}


def _mask_ids(state: tk.G) -> np.ndarray:
    cached = _MASK_CACHE.get(state)
    if cached is None:
        parts = [np.arange(lo, hi) for lo, hi in tk.legal_id_ranges(state)]
        cached = np.concatenate(parts) if parts else np.empty(0, dtype=int)
        _MASK_CACHE[state] = cached
    return cached


def next_distribution(model: NgramModel, context, mask_ids: np.ndarray) -> np.ndarray:
    """Add-one-smoothed probabilities over the masked ids.

    Backs off to the longest seen suffix context; uniform over the mask
    when nothing matches (renormalization makes backoff scale factors moot).
    """
    context = tuple(context)[-model.order:] if model.order else ()
    table = None
    for o in range(len(context), -1, -1):
        ctx = context[len(context) - o:]
        table = model.counts.get(o, {}).get(ctx)
        if table:
            break
    probs = np.ones(len(mask_ids), dtype=np.float64)
    if table:
        # mask_ids is sorted; scatter the (sparse) counts into it
        tids = np.fromiter(table.keys(), dtype=np.int64, count=len(table))
        cnts = np.fromiter(table.values(), dtype=np.float64, count=len(table))
        j = np.searchsorted(mask_ids, tids)
        j = np.minimum(j, len(mask_ids) - 1)
        valid = mask_ids[j] == tids
        np.add.at(probs, j[valid], cnts[valid])
    return probs / probs.sum()


def _truncate(mask_ids: np.ndarray, probs: np.ndarray, cfg: SamplerConfig):
    if cfg.temperature != 1.0:
        probs = probs ** (1.0 / cfg.temperature)
        probs = probs / probs.sum()
    # stable order: descending probability, ascending id on ties
    if len(probs) > cfg.top_k:
        # pre-select the top-k cheaply; resolve boundary ties by lowest id
        # (mask_ids is sorted, so index order is id order)
        rough = np.argpartition(-probs, cfg.top_k - 1)[: cfg.top_k]
        threshold = probs[rough].min()
        above = np.nonzero(probs > threshold)[0]
        at = np.nonzero(probs == threshold)[0]
        pool = np.concatenate([above, at[: cfg.top_k - len(above)]])
    else:
        pool = np.arange(len(probs))
    order = pool[np.lexsort((mask_ids[pool], -probs[pool]))]
    order = order[: cfg.top_k]
    p = probs[order]
    csum = np.cumsum(p / p.sum())
    cutoff = int(np.searchsorted(csum, cfg.top_p, side="left")) + 1
    order = order[:cutoff]
    p = probs[order]
    return mask_ids[order], p / p.sum()


def _greedy_completion_token(state: tk.G) -> int:
    # shortest route to EOS: finish the pending construct, close, stop
    classes = tk.legal_next(state)
    for cls in (tk.TokenClass.EOS, tk.TokenClass.CMD_Z):
        if cls in classes:
            return tk._CLASS_RANGES[cls][0]
    # coord/color/angle/flags states have a single legal class
    lo, _ = tk.legal_id_ranges(state)[0]
    return lo


def sample(model: NgramModel, cfg: SamplerConfig | None = None) -> tk.TokenSeq:
    """Draw one grammar-valid sequence; deterministic in cfg.seed."""
    cfg = cfg or SamplerConfig()
    rng = SplitMix64(cfg.seed)
    ids = [tk.SOS]
    state = tk.advance(tk.G.EXPECT_SOS, tk.SOS)
    while state is not tk.G.DONE:
        if len(ids) >= cfg.max_len:
            tid = _greedy_completion_token(state)
        else:
            mask = _mask_ids(state)
            probs = next_distribution(model, ids, mask)
            cand, p = _truncate(mask, probs, cfg)
            u = rng.next_float()
            idx = int(np.searchsorted(np.cumsum(p), u, side="right"))
            tid = int(cand[min(idx, len(cand) - 1)])
        ids.append(tid)
        state = tk.advance(state, tid)
    return tk.TokenSeq(ids=ids)


def perplexity(model: NgramModel, heldout: list) -> float:
    """exp(mean NLL) under the grammar-masked next distribution."""
    if not heldout:
        raise EmptyCorpus("no heldout sequences")
    total = 0.0
    count = 0
    for seq in heldout:
        ids = list(seq.ids) if isinstance(seq, tk.TokenSeq) else list(seq)
        state = tk.G.EXPECT_SOS
        for pos, tid in enumerate(ids):
            if pos > 0:
                mask = _mask_ids(state)
                probs = next_distribution(model, ids[:pos], mask)
                j = int(np.searchsorted(mask, tid))
                if j >= len(mask) or mask[j] != tid:
                    raise tk.GrammarError(pos, state.value, tid)
                total += -float(np.log(probs[j]))
                count += 1
            state = tk.advance(state, tid, pos)
    return float(np.exp(total / count))


# ---------------------------------------------------------------------------
# Model file I/O
# ---------------------------------------------------------------------------

_MAGIC = b"SVGN"


def save_model(model: NgramModel, path) -> None:
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<BBI", 1, model.order, model.vocab_size))
        for o in sorted(model.counts):
            for ctx in sorted(model.counts[o]):
                for nxt in sorted(model.counts[o][ctx]):
                    fh.write(struct.pack("<B", o))
                    fh.write(struct.pack(f"<{o}I", *ctx) if o else b"")
                    fh.write(struct.pack("<II", nxt, model.counts[o][ctx][nxt]))


def load_model(path) -> NgramModel:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise BadMagic(f"{path}: not a model file")
    version, order, vocab_size = struct.unpack_from("<BBI", data, 4)
    if version != 1:
        raise BadMagic(f"{path}: unsupported version {version}")
    model = NgramModel(order=order, vocab_size=vocab_size)
    pos = 10
    while pos < len(data):
        o = data[pos]
        pos += 1
        ctx = struct.unpack_from(f"<{o}I", data, pos) if o else ()
        pos += 4 * o
        nxt, cnt = struct.unpack_from("<II", data, pos)
        pos += 8
        model.counts.setdefault(o, {}).setdefault(tuple(ctx), {})[nxt] = cnt
    return model
