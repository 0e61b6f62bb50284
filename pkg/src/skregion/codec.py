"""Finite-blocklength simulation of the superposition / double-binning scheme.

Terminal 3 holds a layered random codebook.  Layer-0 codewords u0 are drawn
i.i.d. from p(U0); for each of them, layer-1 and layer-2 sub-codebooks are
drawn symbolwise from p(U1|U0) and p(U2|U0).  Every codeword of a layer is
tagged with a (row, column, randomization) triple: the row is the key, the
column is announced publicly, the randomization index is withheld.

Sub-codebooks are regenerated on demand from ``(seed, layer, u0 index)``
so only layer 0 is held in memory.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np

from .dmms import AuxChannelSet, ExtendedPmf, JointPmf4, extend_with_aux, marginal, sample_iid
from .errors import (
    BudgetExceeded,
    DecodeFailure,
    DegenerateRates,
    EncoderFailure,
    ZeroEvidence,
)
from .info import conditional_entropy as hc
from .info import conditional_mutual_information as cmi
from .info import empirical_entropy, entropy
from .region import inner_bound_point

DEFAULT_TYP_EPS = 0.05
DEFAULT_BACKOFF = 0.25
MAX_CODEWORDS = 1 << 22
POSTERIOR_BUDGET = 10**6


class LayerRates(NamedTuple):
    r: float
    r_pub: float
    r_rand: float

    @property
    def total(self) -> float:
        return self.r + self.r_pub + self.r_rand


class KeyTriple(NamedTuple):
    k0: int
    k1: int
    k2: int


class PublicMessage(NamedTuple):
    cols: tuple[int, int, int]
    q_index: int


def layer_rates(ext: ExtendedPmf, pmf: JointPmf4, aux: AuxChannelSet, eps1: float,
                backoff: float = 0.0) -> tuple[LayerRates, LayerRates, LayerRates]:
    """Key, public and randomization rates of the three layers.

    The public rate is the Slepian-Wolf rate needed by the weaker decoder
    plus ``eps1``; the randomization rate covers what the best observer
    other than the intended one could learn.  Key rates are the inner-bound
    corner scaled by ``1 - backoff``.
    """
    if eps1 < 0 or not 0 <= backoff <= 1:
        raise DegenerateRates(f"need eps1 >= 0 and 0 <= backoff <= 1 (got {eps1}, {backoff})")
    corner = inner_bound_point(pmf, aux)
    keep = 1.0 - backoff
    l0 = LayerRates(
        corner.r0 * keep,
        max(hc(ext, ["U0"], ["X1", "Q"]), hc(ext, ["U0"], ["X2", "Q"])) + eps1,
        cmi(ext, ["U0"], ["X4"], ["Q"]),
    )
    uq = ["U0", "Q"]
    l1 = LayerRates(
        corner.r1 * keep,
        hc(ext, ["U1"], ["X1"] + uq) + eps1,
        max(cmi(ext, ["U1"], ["X2", "U2"], uq), cmi(ext, ["U1"], ["X4", "U2"], uq)),
    )
    l2 = LayerRates(
        corner.r2 * keep,
        hc(ext, ["U2"], ["X2"] + uq) + eps1,
        max(cmi(ext, ["U2"], ["X1", "U1"], uq), cmi(ext, ["U2"], ["X4", "U1"], uq)),
    )
    for lr in (l0, l1, l2):
        if not all(math.isfinite(v) and v >= 0 for v in lr):
            raise DegenerateRates(f"invalid layer rates {lr}")
    return l0, l1, l2


def _bins(n: int, rate: float) -> int:
    return max(1, math.ceil(2.0 ** (n * rate) - 1e-9))


def _assign_tags(rng, count: int, dims: tuple[int, int, int]) -> np.ndarray:
    """Equal-size uniform partition of ``count`` codewords into the grid.

    Codewords are visited in random order and dealt out row-fastest, so row
    bins differ in size by at most one.
    """
    rows, cols, _ = dims
    order = rng.permutation(count)
    j = np.empty(count, dtype=np.int64)
    j[order] = np.arange(count)
    return np.stack([j % rows, (j // rows) % cols, j // (rows * cols)], axis=1)


def _draw_conditional(rng, cond: np.ndarray, given: np.ndarray, count: int) -> np.ndarray:
    """``count`` sequences drawn symbolwise from cond[given_t, :]."""
    cdf = np.cumsum(cond[given], axis=-1)  # (n, card)
    cdf[:, -1] = 1.0
    u = rng.random((count, given.size))
    out = (u[..., None] >= cdf[None]).sum(axis=-1)
    return np.minimum(out, cond.shape[-1] - 1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class SubCodebook:
    codewords: np.ndarray  # (M, n)
    tags: np.ndarray  # (M, 3)

    def column(self, col: int) -> np.ndarray:
        return np.flatnonzero(self.tags[:, 1] == col)


@dataclass(eq=False)
class LayeredCodebook:
    """Random layered codebook held by Terminal 3.

    ``layer0`` / ``tags0`` are materialized; layer-1 and layer-2
    sub-codebooks of u0 number ``i`` come from :meth:`sub`.
    """

    n: int
    seed: int
    eps1: float
    backoff: float
    pmf: JointPmf4
    aux: AuxChannelSet
    ext: ExtendedPmf
    rates: tuple[LayerRates, LayerRates, LayerRates]
    dims: tuple[tuple[int, int, int], ...]
    counts: tuple[int, int, int]
    layer0: np.ndarray
    tags0: np.ndarray
    q_codewords: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)
    _col0: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        order = np.argsort(self.tags0[:, 1], kind="stable")
        cols = self.tags0[order, 1]
        bounds = np.flatnonzero(np.diff(cols)) + 1
        for grp in np.split(order, bounds):
            if grp.size:
                self._col0[int(self.tags0[grp[0], 1])] = grp

    def column0(self, col: int) -> np.ndarray:
        return self._col0.get(int(col), np.zeros(0, dtype=np.int64))

    def sub(self, layer: int, i0: int) -> SubCodebook:
        key = (layer, int(i0))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        rng = np.random.default_rng([self.seed, layer, int(i0)])
        u0 = self.layer0[i0]
        name = "U1" if layer == 1 else "U2"
        cond = _cond_table(self.ext, name, "U0")
        cw = _draw_conditional(rng, cond, u0, self.counts[layer])
        tags = _assign_tags(rng, self.counts[layer], self.dims[layer])
        sub = SubCodebook(cw, tags)
        if len(self._cache) > 500_000:
            self._cache.clear()
        self._cache[key] = sub
        return sub

    @property
    def key_sizes(self) -> tuple[int, int, int]:
        return tuple(d[0] for d in self.dims)


def _cond_table(ext: ExtendedPmf, target: str, given: str) -> np.ndarray:
    """p(target | given) with undefined rows replaced by the target marginal."""
    j = marginal(ext, [given, target]).table
    den = j.sum(axis=1, keepdims=True)
    fallback = j.sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(den > 0, j / np.where(den > 0, den, 1.0), fallback[None, :])
    return c


def build_codebook(pmf: JointPmf4, aux: AuxChannelSet, n: int, eps1: float, seed: int,
                   backoff: float = 0.0, max_codewords: int = MAX_CODEWORDS) -> LayeredCodebook:
    """Draw the layered codebook for blocklength ``n``.

    Each layer holds ceil(2^(n (r + r_pub + r_rand))) codewords on a
    ceil(2^(n r)) x ceil(2^(n r_pub)) x ceil(2^(n r_rand)) tag grid.
    """
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    ext = extend_with_aux(pmf, aux)
    rates = layer_rates(ext, pmf, aux, eps1, backoff)
    dims = tuple((_bins(n, lr.r), _bins(n, lr.r_pub), _bins(n, lr.r_rand)) for lr in rates)
    counts = []
    for lr in rates:
        exponent = n * lr.total
        if exponent > math.log2(max_codewords):
            raise BudgetExceeded(f"layer needs 2^{exponent:.1f} codewords (> {max_codewords})")
        counts.append(max(1, math.ceil(2.0 ** exponent - 1e-9)))
    if counts[0] < 1:
        raise DegenerateRates("layer 0 has no codewords")
    p_u0 = marginal(ext, ["U0"]).table
    rng0 = np.random.default_rng([seed, 0])
    layer0 = rng0.choice(p_u0.size, size=(counts[0], n), p=p_u0).astype(np.int64)
    tags0 = _assign_tags(np.random.default_rng([seed, 10]), counts[0], dims[0])
    i_q = cmi(ext, ["U0", "U1", "U2"], ["Q"])
    n_q = _bins(n, i_q)
    if n * i_q > math.log2(max_codewords):
        raise BudgetExceeded("too many Q codewords")
    p_q = marginal(ext, ["Q"]).table
    q_cw = np.random.default_rng([seed, 3]).choice(p_q.size, size=(n_q, n), p=p_q).astype(np.int64)
    return LayeredCodebook(n, seed, eps1, backoff, pmf, aux, ext, rates, dims, tuple(counts),
                           layer0, tags0, q_cw)


# ---------------------------------------------------------------------------
# typicality

def typical_mask(seqs, dist, eps: float) -> np.ndarray:
    """Strong typicality of stacked sequence tuples.

    ``seqs`` is a list of integer arrays broadcastable to (..., n), one per
    axis of ``dist``.  A tuple is typical when every joint-type cell is
    within ``eps`` of its probability and no zero-probability cell occurs.
    """
    dist = np.asarray(dist)
    arrs = np.broadcast_arrays(*[np.asarray(s) for s in seqs])
    n = arrs[0].shape[-1]
    flat = np.ravel_multi_index(arrs, dist.shape)
    p = dist.ravel()
    ok = np.ones(flat.shape[:-1], dtype=bool)
    for cell in range(p.size):
        cnt = (flat == cell).sum(axis=-1)
        if p[cell] == 0:
            ok &= cnt == 0
        else:
            ok &= np.abs(cnt / n - p[cell]) <= eps + 1e-12
    return ok


def _typ_dist(cb: LayeredCodebook, names):
    return marginal(cb.ext, names).table


# ---------------------------------------------------------------------------
# encoding and decoding

@dataclass(frozen=True)
class Encoding:
    keys: KeyTriple
    message: PublicMessage
    indices: tuple[int, int, int, int]  # (i0, i1, i2, iq)


def encode(cb: LayeredCodebook, x3_seq, typ_eps: float = DEFAULT_TYP_EPS, seed=0) -> Encoding:
    """Terminal 3: pick jointly typical codewords, emit keys and public columns.

    Raises EncoderFailure when x3 is atypical or a candidate set is empty.
    """
    x3 = np.asarray(x3_seq, dtype=np.int64)
    if x3.size != cb.n:
        raise ValueError(f"x3 has length {x3.size}, codebook blocklength is {cb.n}")
    rng = np.random.default_rng(seed)
    if not typical_mask([x3], _typ_dist(cb, ["X3"]), typ_eps):
        raise EncoderFailure("observation is not typical")
    c0 = np.flatnonzero(typical_mask([cb.layer0, x3], _typ_dist(cb, ["U0", "X3"]), typ_eps))
    if c0.size == 0:
        raise EncoderFailure("no layer-0 codeword jointly typical with x3")
    i0 = int(c0[rng.integers(c0.size)])
    u0 = cb.layer0[i0]
    picks = []
    for layer, name in ((1, "U1"), (2, "U2")):
        sub = cb.sub(layer, i0)
        c = np.flatnonzero(typical_mask([sub.codewords, u0, x3],
                                        _typ_dist(cb, [name, "U0", "X3"]), typ_eps))
        if c.size == 0:
            raise EncoderFailure(f"no layer-{layer} codeword jointly typical with (u0, x3)")
        picks.append((sub, int(c[rng.integers(c.size)])))
    (s1, i1), (s2, i2) = picks
    u1, u2 = s1.codewords[i1], s2.codewords[i2]
    cq = np.flatnonzero(typical_mask([cb.q_codewords, u0, u1, u2],
                                     _typ_dist(cb, ["Q", "U0", "U1", "U2"]), typ_eps))
    if cq.size == 0:
        raise EncoderFailure("no Q codeword jointly typical with the selection")
    iq = int(cq[rng.integers(cq.size)])
    keys = KeyTriple(int(cb.tags0[i0, 0]), int(s1.tags[i1, 0]), int(s2.tags[i2, 0]))
    msg = PublicMessage((int(cb.tags0[i0, 1]), int(s1.tags[i1, 1]), int(s2.tags[i2, 1])), iq)
    return Encoding(keys, msg, (i0, i1, i2, iq))


@dataclass(frozen=True)
class Decoded:
    k0: int
    k_private: int
    i0: int
    i_private: int


def _decode(cb: LayeredCodebook, own: str, layer: int, x_seq, msg: PublicMessage,
            typ_eps: float) -> Decoded:
    x = np.asarray(x_seq, dtype=np.int64)
    q = cb.q_codewords[msg.q_index]
    col0 = cb.column0(msg.cols[0])
    hits = col0[typical_mask([cb.layer0[col0], x, q], _typ_dist(cb, ["U0", own, "Q"]), typ_eps)]
    if hits.size != 1:
        raise DecodeFailure(f"{hits.size} layer-0 candidates", layer=0)
    i0 = int(hits[0])
    k0 = int(cb.tags0[i0, 0])
    sub = cb.sub(layer, i0)
    col = sub.column(msg.cols[layer])
    name = f"U{layer}"
    hits = col[typical_mask([sub.codewords[col], cb.layer0[i0], x, q],
                            _typ_dist(cb, [name, "U0", own, "Q"]), typ_eps)]
    if hits.size != 1:
        raise DecodeFailure(f"{hits.size} layer-{layer} candidates", layer=layer, k0=k0, i0=i0)
    i = int(hits[0])
    return Decoded(k0, int(sub.tags[i, 0]), i0, i)


def decode_t1(cb: LayeredCodebook, x1_seq, msg: PublicMessage,
              typ_eps: float = DEFAULT_TYP_EPS) -> Decoded:
    """Terminal 1 recovers (k0, k1) from x1 and the public columns."""
    return _decode(cb, "X1", 1, x1_seq, msg, typ_eps)


def decode_t2(cb: LayeredCodebook, x2_seq, msg: PublicMessage,
              typ_eps: float = DEFAULT_TYP_EPS) -> Decoded:
    """Terminal 2 recovers (k0, k2) from x2 and the public columns."""
    return _decode(cb, "X2", 2, x2_seq, msg, typ_eps)


# ---------------------------------------------------------------------------
# posterior attacks

@dataclass(frozen=True)
class KeyPosterior:
    """Posterior over key rows, shape ``cb.key_sizes``; u0_mass maps u0 index to mass."""

    table: np.ndarray
    u0_mass: dict

    def marginal(self, layer: int) -> np.ndarray:
        axes = tuple(a for a in range(3) if a != layer)
        return self.table.sum(axis=axes)

    def entropy(self, layer: int | None = None) -> float:
        t = self.table if layer is None else self.marginal(layer)
        return entropy(t / t.sum())


def _key_posterior(cb: LayeredCodebook, evidence: dict, msg: PublicMessage,
                   fixed=(None, None, None), budget: int = POSTERIOR_BUDGET) -> KeyPosterior:
    """Bayes posterior over key rows under a uniform prior on consistent tuples.

    ``evidence`` maps observed variable names to sequences; ``fixed`` pins
    (i0, i1, i2) indices the observer already knows.
    """
    names = list(evidence)
    seqs = [np.asarray(evidence[v], dtype=np.int64) for v in names]
    joint = marginal(cb.ext, ["Q", "U0", "U1", "U2"] + names).table
    den = joint.reshape(joint.shape[:4] + (-1,)).sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = joint / den.reshape(den.shape + (1,) * len(names))
        logc = np.log(np.nan_to_num(cond, nan=0.0))
    q = cb.q_codewords[msg.q_index]
    f0, f1, f2 = fixed
    cand0 = np.array([f0]) if f0 is not None else cb.column0(msg.cols[0])
    plan, total = [], 0
    for i0 in cand0:
        s1, s2 = cb.sub(1, i0), cb.sub(2, i0)
        c1 = np.array([f1]) if f1 is not None else s1.column(msg.cols[1])
        c2 = np.array([f2]) if f2 is not None else s2.column(msg.cols[2])
        total += c1.size * c2.size
        if total > budget:
            raise BudgetExceeded(f"posterior enumeration exceeds {budget} tuples")
        plan.append((int(i0), s1, c1, s2, c2))
    lls, keys = [], []
    for i0, s1, c1, s2, c2 in plan:
        u0 = cb.layer0[i0]
        u1 = s1.codewords[c1][:, None, :]
        u2 = s2.codewords[c2][None, :, :]
        idx = (q, u0, u1, u2) + tuple(seqs)
        ll = logc[idx].sum(axis=-1)  # (|c1|, |c2|)
        k1 = np.broadcast_to(s1.tags[c1, 0][:, None], ll.shape)
        k2 = np.broadcast_to(s2.tags[c2, 0][None, :], ll.shape)
        k0 = np.full(ll.shape, cb.tags0[i0, 0])
        i0s = np.full(ll.shape, i0)
        lls.append(ll.ravel())
        keys.append(np.stack([k0.ravel(), k1.ravel(), k2.ravel(), i0s.ravel()], axis=1))
    ll = np.concatenate(lls) if lls else np.zeros(0)
    if ll.size == 0 or not np.isfinite(ll.max()):
        raise ZeroEvidence("every consistent codeword tuple has zero likelihood")
    w = np.exp(ll - ll.max())
    w /= w.sum()
    k = np.concatenate(keys)
    table = np.zeros(cb.key_sizes)
    np.add.at(table, (k[:, 0], k[:, 1], k[:, 2]), w)
    u0_mass = {}
    for i0, m in zip(k[:, 3], w):
        u0_mass[int(i0)] = u0_mass.get(int(i0), 0.0) + float(m)
    return KeyPosterior(table, u0_mass)


def eve_posterior(cb: LayeredCodebook, x4_seq, msg: PublicMessage,
                  budget: int = POSTERIOR_BUDGET, known_u0: int | None = None) -> KeyPosterior:
    """Terminal 4's posterior over (k0, k1, k2) given x4 and the public message."""
    return _key_posterior(cb, {"X4": x4_seq}, msg, (known_u0, None, None), budget)


def cross_posterior(cb: LayeredCodebook, observer: str, side_seq, msg: PublicMessage,
                    known: Decoded | None = None, budget: int = POSTERIOR_BUDGET) -> np.ndarray:
    """Posterior of the other terminal's private key row.

    ``observer`` is "T1" (target K2) or "T2" (target K1).  ``known`` is the
    observer's own decoding result; when given, its u0 and private codeword
    are pinned.
    """
    if observer not in ("T1", "T2"):
        raise ValueError("observer must be 'T1' or 'T2'")
    own, target = ("X1", 2) if observer == "T1" else ("X2", 1)
    fixed = [None, None, None]
    if known is not None:
        fixed[0] = known.i0
        fixed[3 - target] = known.i_private
    post = _key_posterior(cb, {own: side_seq}, msg, tuple(fixed), budget)
    return post.marginal(target)


# ---------------------------------------------------------------------------
# Monte Carlo harness

@dataclass
class SimulationReport:
    n: int
    trials: int
    encoder_failures: int
    encoder_failure_rate: float
    err_common: float
    err_pk1: float
    err_pk2: float
    leak_eve_per_symbol: float
    leak_cross_12: float
    leak_cross_21: float
    uniformity_gap: tuple[float, float, float]
    key_entropy: tuple[float, float, float]
    key_sizes: tuple[int, int, int]
    posterior_failures: int
    rates: list

    def to_dict(self) -> dict:
        d = asdict(self)
        d["uniformity_gap"] = list(self.uniformity_gap)
        d["key_entropy"] = list(self.key_entropy)
        d["key_sizes"] = list(self.key_sizes)
        return d

    CSV_HEADER = ("n,err_common,err_pk1,err_pk2,leak_eve,leak_12,leak_21,"
                  "unif_gap0,unif_gap1,unif_gap2,enc_fail")

    def csv_row(self) -> str:
        vals = [self.err_common, self.err_pk1, self.err_pk2, self.leak_eve_per_symbol,
                self.leak_cross_12, self.leak_cross_21, *self.uniformity_gap,
                self.encoder_failure_rate]
        return ",".join([str(self.n)] + [repr(float(v)) for v in vals])


@dataclass(frozen=True)
class _Trial:
    encoded: bool
    keys: tuple = ()
    common_ok: bool = False
    pk1_ok: bool = False
    pk2_ok: bool = False
    h_eve: float = float("nan")
    h_k2_at_t1: float = float("nan")
    h_k1_at_t2: float = float("nan")


def _one_trial(cb: LayeredCodebook, typ_eps: float, seed: int, t: int, budget: int) -> _Trial:
    block = sample_iid(cb.pmf, cb.n, [seed, 100, t])
    try:
        enc = encode(cb, block.x3, typ_eps, seed=[seed, 200, t])
    except EncoderFailure:
        return _Trial(False)
    dec = {}
    for term, fn, x in (("T1", decode_t1, block.x1), ("T2", decode_t2, block.x2)):
        try:
            dec[term] = (fn(cb, x, enc.message, typ_eps), None)
        except DecodeFailure as exc:
            dec[term] = (None, exc)
    k = enc.keys

    def k0_of(term):
        d, exc = dec[term]
        return d.k0 if d is not None else exc.k0

    common_ok = k0_of("T1") == k.k0 and k0_of("T2") == k.k0
    d1, d2 = dec["T1"][0], dec["T2"][0]
    pk1_ok = d1 is not None and d1.k_private == k.k1
    pk2_ok = d2 is not None and d2.k_private == k.k2
    try:
        h_eve = eve_posterior(cb, block.x4, enc.message, budget).entropy()
        p2 = cross_posterior(cb, "T1", block.x1, enc.message, d1, budget)
        p1 = cross_posterior(cb, "T2", block.x2, enc.message, d2, budget)
        h21 = entropy(p2 / p2.sum())
        h12 = entropy(p1 / p1.sum())
    except ZeroEvidence:
        h_eve = h21 = h12 = float("nan")
    return _Trial(True, tuple(k), common_ok, pk1_ok, pk2_ok, h_eve, h21, h12)


def run_trials(pmf: JointPmf4, aux: AuxChannelSet, n: int, eps1: float, typ_eps: float,
               trials: int, seed: int, backoff: float = DEFAULT_BACKOFF, threads: int = 1,
               budget: int = POSTERIOR_BUDGET, codebook: LayeredCodebook | None = None
               ) -> SimulationReport:
    """Fix one codebook, run ``trials`` independent blocks, aggregate metrics.

    Trial ``t`` uses its own seed streams, so the report is the same for any
    ``threads``.  Encoder failures are excluded from the error and leakage
    denominators and reported separately.
    """
    cb = codebook or build_codebook(pmf, aux, n, eps1, seed, backoff=backoff)
    run = lambda t: _one_trial(cb, typ_eps, seed, t, budget)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, range(trials)))
    else:
        results = [run(t) for t in range(trials)]
    return _aggregate(cb, results, trials)


def _aggregate(cb: LayeredCodebook, results: list[_Trial], trials: int) -> SimulationReport:
    ok = [r for r in results if r.encoded]
    used = len(ok)
    nan = float("nan")
    sizes = cb.key_sizes

    def rate(pred):
        return sum(1 for r in ok if not pred(r)) / used if used else nan

    if used:
        keys = np.array([r.keys for r in ok], dtype=np.int64)
        flat = np.ravel_multi_index(keys.T, sizes)
        h_all = empirical_entropy(flat)
        h_k = tuple(empirical_entropy(keys[:, j]) for j in range(3))
    else:
        h_all, h_k = nan, (nan, nan, nan)
    n = cb.n

    def leak(h_key, vals):
        vals = [v for v in vals if not math.isnan(v)]
        if not vals:
            return nan
        return max(0.0, (h_key - float(np.mean(vals))) / n)

    post_fail = sum(1 for r in ok if math.isnan(r.h_eve))
    gaps = tuple(max(0.0, (math.log2(s) - h) / n) if used else nan for s, h in zip(sizes, h_k))
    return SimulationReport(
        n=n,
        trials=trials,
        encoder_failures=trials - used,
        encoder_failure_rate=(trials - used) / trials if trials else nan,
        err_common=rate(lambda r: r.common_ok),
        err_pk1=rate(lambda r: r.pk1_ok),
        err_pk2=rate(lambda r: r.pk2_ok),
        leak_eve_per_symbol=leak(h_all, [r.h_eve for r in ok]),
        leak_cross_12=leak(h_k[2], [r.h_k2_at_t1 for r in ok]),
        leak_cross_21=leak(h_k[1], [r.h_k1_at_t2 for r in ok]),
        uniformity_gap=gaps,
        key_entropy=h_k,
        key_sizes=sizes,
        posterior_failures=post_fail,
        rates=[list(lr) for lr in cb.rates],
    )
