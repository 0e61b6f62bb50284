"""Inner bound, outer box and special-case capacities of the key-rate region.

For auxiliaries (U0, U1, U2, Q) generated from X3 the achievable corner is

    R0 = [min{I(U0;X1|Q), I(U0;X2|Q)} - I(U0;X4|Q)]^+
    R1 = [I(U1;X1|U0,Q) - max{I(U1;X2,U2|U0,Q), I(U1;X4,U2|U0,Q)}]^+
    R2 = [I(U2;X2|U0,Q) - max{I(U2;X1,U1|U0,Q), I(U2;X4,U1|U0,Q)}]^+

and the region is the convex, downward-closed hull of all such corners.
Evaluation is batched: many auxiliary tuples are stacked on a leading axis
and reduced together.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.special import entr

from .dmms import AuxChannelSet, JointPmf4, is_markov_chain
from .errors import BudgetZero, ShapeMismatch
from .info import conditional_mutual_information as cmi

LN2 = math.log(2.0)
# Rate components below this are floating-point residue of exact zeros.
RATE_FLOOR = 1e-12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_WEIGHTS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1), (2, 1, 1), (1, 2, 1), (1, 1, 2))


class RateTriple(NamedTuple):
    r0: float
    r1: float
    r2: float


class OuterBox(NamedTuple):
    b0: float
    b1: float
    b2: float


# ---------------------------------------------------------------------------
# batched evaluation

# axis of each variable in the batched joint; axis 0 is the batch
_AXIS = {"Q": 1, "U0": 2, "U1": 3, "U2": 4, "X1": 5, "X2": 6, "X4": 7}


def _batch_joint(src, ch_u0, ch_u1, ch_u2, ch_q):
    """Stacked joints over (Q, U0, U1, U2, X1, X2, X4); X3 is summed out."""
    inner = np.einsum("nza,xyzw->nazxyw", ch_u0, src)
    inner = np.einsum("nazb,nazc,nazxyw->nabcxyw", ch_u1, ch_u2, inner)
    return np.einsum("nabcq,nabcxyw->nqabcxyw", ch_q, inner)


class _Entropies:
    def __init__(self, joint):
        self.joint = joint
        self.cache = {}

    def __call__(self, names):
        key = frozenset(names)
        if not key:
            return 0.0
        if key not in self.cache:
            keep = {_AXIS[v] for v in key}
            drop = tuple(a for a in range(1, self.joint.ndim) if a not in keep)
            m = self.joint.sum(axis=drop)
            self.cache[key] = entr(m).reshape(m.shape[0], -1).sum(axis=1) / LN2
        return self.cache[key]

    def cmi(self, a, b, c):
        a, b, c = set(a), set(b), set(c)
        return self(a | c) + self(b | c) - self(a | b | c) - self(c)


def _rates_from_joint(joint) -> np.ndarray:
    h = _Entropies(joint)
    q, uq = {"Q"}, {"U0", "Q"}
    r0 = np.minimum(h.cmi({"U0"}, {"X1"}, q), h.cmi({"U0"}, {"X2"}, q)) - h.cmi({"U0"}, {"X4"}, q)
    r1 = h.cmi({"U1"}, {"X1"}, uq) - np.maximum(h.cmi({"U1"}, {"X2", "U2"}, uq),
                                                 h.cmi({"U1"}, {"X4", "U2"}, uq))
    r2 = h.cmi({"U2"}, {"X2"}, uq) - np.maximum(h.cmi({"U2"}, {"X1", "U1"}, uq),
                                                 h.cmi({"U2"}, {"X4", "U1"}, uq))
    rates = np.stack([r0, r1, r2], axis=-1)
    rates[rates < RATE_FLOOR] = 0.0
    return rates


def _batch_rates(src, ch_u0, ch_u1, ch_u2, ch_q) -> np.ndarray:
    return _rates_from_joint(_batch_joint(src, ch_u0, ch_u1, ch_u2, ch_q))


def inner_bound_point(pmf: JointPmf4, aux: AuxChannelSet) -> RateTriple:
    """Corner (R0, R1, R2) of the inner bound for one auxiliary choice."""
    if aux.x3_size != pmf.alphabet_sizes[2]:
        raise ShapeMismatch(f"aux built for |X3|={aux.x3_size}, pmf has {pmf.alphabet_sizes[2]}")
    r = _batch_rates(pmf.table, aux.ch_u0[None], aux.ch_u1[None], aux.ch_u2[None], aux.ch_q[None])
    return RateTriple(*(float(v) for v in r[0]))


def outer_bound(pmf: JointPmf4) -> OuterBox:
    """Closed-form outer box on (R0, R1, R2)."""
    i31_4 = cmi(pmf, ["X3"], ["X1"], ["X4"])
    i32_4 = cmi(pmf, ["X3"], ["X2"], ["X4"])
    i31_2 = cmi(pmf, ["X3"], ["X1"], ["X2"])
    i32_1 = cmi(pmf, ["X3"], ["X2"], ["X1"])
    return OuterBox(min(i31_4, i32_4), min(i31_4, i31_2), min(i32_4, i32_1))


# ---------------------------------------------------------------------------
# frontier representation

def _in_hull(points: np.ndarray, p: np.ndarray, tol: float) -> bool:
    """Is p <= some convex combination of ``points`` and the origin?"""
    if np.all(p <= tol):
        return True
    if len(points) == 0:
        return False
    if np.any(p > points.max(axis=0) + tol):
        return False
    m = len(points)
    a_ub = np.vstack([-points.T, np.ones((1, m))])
    b_ub = np.concatenate([-(p - tol), [1.0]])
    res = linprog(np.zeros(m), A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    return res.status == 0


def _pareto_mask(pts: np.ndarray, chunk: int = 512) -> np.ndarray:
    """True for points not weakly dominated by a different point."""
    keep = np.ones(len(pts), dtype=bool)
    for s in range(0, len(pts), chunk):
        block = pts[s:s + chunk]
        ge = np.all(pts[None, :, :] >= block[:, None, :], axis=2)
        ne = np.any(pts[None, :, :] != block[:, None, :], axis=2)
        keep[s:s + chunk] = ~np.any(ge & ne, axis=1)
    return keep


def frontier_indices(rates: np.ndarray, tol: float = 1e-12) -> list[int]:
    """Indices of corner points not dominated by the hull of the others.

    Duplicates keep their first occurrence; among points that dominate each
    other only within ``tol`` the lexicographically larger survives.
    """
    rounded = np.round(np.asarray(rates, dtype=np.float64), 12)
    _, first = np.unique(rounded, axis=0, return_index=True)
    first = np.sort(first)
    pts = rounded[first]
    nonzero = np.any(pts > 0, axis=1)
    if not nonzero.any():
        return [int(first[0])]
    idx, pts = first[nonzero], pts[nonzero]
    mask = _pareto_mask(pts)
    idx, pts = idx[mask], pts[mask]
    order = list(np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0])))
    alive = set(order)
    for i in order:
        others = sorted(alive - {i})
        if _in_hull(pts[others], pts[i], tol):
            alive.discard(i)
    survivors = [i for i in order if i in alive]
    return [int(idx[i]) for i in survivors]


@dataclass
class RegionFrontier:
    """Corner points of a convex, downward-closed rate region."""

    points: list[RateTriple]
    provenance: list[AuxChannelSet | None] = field(default_factory=list)

    def max_rates(self) -> RateTriple:
        arr = np.array(self.points).reshape(-1, 3)
        return RateTriple(*(float(v) for v in arr.max(axis=0)))

    def to_csv(self) -> str:
        lines = ["r0,r1,r2"]
        lines += [f"{p.r0!r},{p.r1!r},{p.r2!r}" for p in self.points]
        return "\n".join(lines) + "\n"

    def provenance_json(self) -> str:
        doc = [{"point": list(p), "aux": None if a is None else a.to_dict()}
               for p, a in zip(self.points, self.provenance)]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_csv(cls, text: str) -> "RegionFrontier":
        rows = [ln.strip() for ln in text.strip().splitlines()]
        if not rows or rows[0].replace(" ", "") != "r0,r1,r2":
            raise ValueError("frontier CSV must start with header r0,r1,r2")
        pts = [RateTriple(*(float(v) for v in ln.split(","))) for ln in rows[1:] if ln]
        return cls(pts, [None] * len(pts))


def contains(frontier: RegionFrontier, point, tol: float = 1e-9) -> bool:
    """Is ``point`` dominated by a convex combination of corners and the origin?"""
    pts = np.array(frontier.points, dtype=np.float64).reshape(-1, 3)
    return _in_hull(pts, np.asarray(point, dtype=np.float64), tol)


# ---------------------------------------------------------------------------
# auxiliary search

@dataclass(frozen=True)
class SearchConfig:
    """Budgets for the auxiliary search.

    Cardinalities left as None default to |X3|; |Q| defaults to 1.
    """

    card_u0: int | None = None
    card_u1: int | None = None
    card_u2: int | None = None
    card_q: int = 1
    exhaustive_budget: int = 10**6
    n_random: int = 512
    sweeps: int = 2
    ascent_pool: int = 256
    golden_iters: int = 16
    weights: tuple = DEFAULT_WEIGHTS
    seed: int = 0

    def resolved(self, x3_size: int) -> "SearchConfig":
        cfg = replace(self, card_u0=self.card_u0 or x3_size, card_u1=self.card_u1 or x3_size,
                      card_u2=self.card_u2 or x3_size)
        if min(cfg.card_u0, cfg.card_u1, cfg.card_u2, cfg.card_q) < 1:
            raise ValueError("cardinalities must be positive")
        if min(cfg.exhaustive_budget, cfg.n_random, cfg.sweeps, cfg.ascent_pool,
               cfg.golden_iters) < 0:
            raise ValueError("budgets must be non-negative")
        if cfg.exhaustive_budget == 0 and cfg.n_random == 0 and cfg.sweeps == 0:
            raise BudgetZero("every search strategy is disabled")
        if cfg.sweeps and not cfg.weights:
            raise ValueError("coordinate ascent needs at least one weight vector")
        return cfg


class _Shapes(NamedTuple):
    u0: tuple
    u1: tuple
    u2: tuple
    q: tuple


def _shapes(cfg: SearchConfig, x3: int) -> _Shapes:
    c0, c1, c2, cq = cfg.card_u0, cfg.card_u1, cfg.card_u2, cfg.card_q
    return _Shapes((x3, c0), (c0, x3, c1), (c0, x3, c2), (c0, c1, c2, cq))


def _deterministic_stack(shape) -> np.ndarray:
    """All one-hot channels with the given (rows..., card) shape."""
    rows, card = shape[:-1], shape[-1]
    nrows = math.prod(rows)
    count = card ** nrows
    digits = (np.arange(count)[:, None] // card ** np.arange(nrows)[None, :]) % card
    return np.eye(card)[digits].reshape((count,) + shape)


def _random_tuple(shapes: _Shapes, seed: int, k: int):
    rng = np.random.default_rng([seed, 1, k])
    return tuple(rng.dirichlet(np.ones(s[-1]), size=s[:-1]) for s in shapes)


def _aux_from(chans, i) -> AuxChannelSet:
    return AuxChannelSet(*(c[i] for c in chans))


class _Candidates:
    """Evaluated auxiliary tuples kept in insertion order."""

    def __init__(self):
        self.rates = []
        self.lookups = []

    def add(self, rates, lookup):
        self.rates.append(rates)
        self.lookups.append((len(rates), lookup))

    def all_rates(self):
        return np.concatenate(self.rates) if self.rates else np.zeros((0, 3))

    def aux(self, flat: int) -> AuxChannelSet:
        for size, lookup in self.lookups:
            if flat < size:
                return lookup(flat)
            flat -= size
        raise IndexError(flat)


def _row_slots(shapes: _Shapes):
    slots = []
    for ch, shape in enumerate(shapes):
        if shape[-1] < 2:
            continue
        for row in np.ndindex(*shape[:-1]):
            slots.append((ch, row))
    return slots


def _ascent(src, shapes, starts, weights, cfg, record):
    """Lock-step coordinate ascent of w . R for each weight vector.

    ``starts`` are channel tuples with a leading axis of len(weights).  Each
    conditional row is moved toward every simplex vertex with a golden-section
    line search; ``record`` receives the stacked state after every sweep.
    """
    w = np.asarray(weights, dtype=np.float64)
    state = [c.copy() for c in starts]
    nw = len(w)
    cur = (_batch_rates(src, *state) * w).sum(axis=1)

    def objective(ch, row, base, vertex, lam):
        trial = list(state)
        trial[ch] = state[ch].copy()
        sel = (slice(None),) + row
        trial[ch][sel] = (1.0 - lam)[:, None] * base + lam[:, None] * vertex[None, :]
        return (_batch_rates(src, *trial) * w).sum(axis=1), trial[ch]

    for _ in range(cfg.sweeps):
        for ch, row in _row_slots(shapes):
            card = shapes[ch][-1]
            for j in range(card):
                sel = (slice(None),) + row
                base = state[ch][sel].copy()
                vertex = np.eye(card)[j]
                a, b = np.zeros(nw), np.ones(nw)
                c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
                fc, _ = objective(ch, row, base, vertex, c)
                fd, _ = objective(ch, row, base, vertex, d)
                for _ in range(cfg.golden_iters):
                    left = fc >= fd
                    b = np.where(left, d, b)
                    a = np.where(left, a, c)
                    new_c = b - GOLDEN * (b - a)
                    new_d = a + GOLDEN * (b - a)
                    c2 = np.where(left, new_c, d)
                    d2 = np.where(left, c, new_d)
                    probe = np.where(left, new_c, new_d)
                    fp, _ = objective(ch, row, base, vertex, probe)
                    fc, fd = np.where(left, fp, fd), np.where(left, fc, fp)
                    c, d = c2, d2
                best_lam = np.where(fc >= fd, c, d)
                f_mid, t_mid = objective(ch, row, base, vertex, best_lam)
                f_end, t_end = objective(ch, row, base, vertex, np.ones(nw))
                use_end = f_end > f_mid
                f_new = np.where(use_end, f_end, f_mid)
                new_rows = np.where(use_end[:, None], t_end[sel], t_mid[sel])
                improve = f_new > cur + 1e-12
                state[ch][sel] = np.where(improve[:, None], new_rows, base)
                cur = np.where(improve, f_new, cur)
        record([s.copy() for s in state])


def search_inner_region(pmf: JointPmf4, cfg: SearchConfig | None = None,
                        threads: int = 1) -> RegionFrontier:
    """Trace the inner-bound frontier by searching over auxiliary channels.

    Candidates come from (a) every deterministic channel tuple when their
    count fits ``exhaustive_budget``, (b) ``n_random`` Dirichlet(1) tuples
    and (c) coordinate ascent per weight vector started from the best of
    the deterministic tuples and the first ``ascent_pool`` random ones.
    The result does not depend on ``threads``.
    """
    cfg = (cfg or SearchConfig()).resolved(pmf.alphabet_sizes[2])
    src = pmf.table
    shapes = _shapes(cfg, pmf.alphabet_sizes[2])
    cands = _Candidates()
    pool_rates, pool_chans = [], []

    counts = [s[-1] ** math.prod(s[:-1]) for s in shapes]
    total = math.prod(counts)
    if 0 < total <= cfg.exhaustive_budget:
        stacks = [_deterministic_stack(s) for s in shapes]
        chunk = 4096

        def det_chans(idx):
            digits = np.unravel_index(np.asarray(idx), counts)
            return tuple(st[d] for st, d in zip(stacks, digits))

        def det_eval(lo):
            return _batch_rates(src, *det_chans(np.arange(lo, min(lo + chunk, total))))

        starts = range(0, total, chunk)
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                parts = list(ex.map(det_eval, starts))
        else:
            parts = [det_eval(lo) for lo in starts]
        det_rates = np.concatenate(parts)
        cands.add(det_rates, lambda i: _aux_from(det_chans([i]), 0))
        pool_rates.append(det_rates)
        pool_chans.append(det_chans)

    if cfg.n_random:
        tuples = [_random_tuple(shapes, cfg.seed, k) for k in range(cfg.n_random)]
        rchans = tuple(np.stack([t[c] for t in tuples]) for c in range(4))
        rand_rates = _batch_rates(src, *rchans)
        cands.add(rand_rates, lambda i, ch=rchans: _aux_from(ch, i))
        npool = min(cfg.ascent_pool, cfg.n_random)
        if npool:
            pool_rates.append(rand_rates[:npool])
            pool_chans.append(lambda idx, ch=rchans: tuple(c[np.asarray(idx)] for c in ch))

    if cfg.sweeps:
        w = np.asarray(cfg.weights, dtype=np.float64)
        if pool_rates:
            allp = np.concatenate(pool_rates)
            best = np.argmax(allp @ w.T, axis=0)
            offsets = np.cumsum([0] + [len(r) for r in pool_rates])
            parts = []
            for b in best:
                blk = int(np.searchsorted(offsets, b, side="right") - 1)
                parts.append(pool_chans[blk]([b - offsets[blk]]))
            starts = tuple(np.concatenate([p[c] for p in parts]) for c in range(4))
        else:
            t = _random_tuple(shapes, cfg.seed, -1 % 2**31)
            starts = tuple(np.repeat(c[None], len(w), axis=0) for c in t)

        def record(state):
            st = tuple(state)
            cands.add(_batch_rates(src, *st), lambda i, ch=st: _aux_from(ch, i))

        _ascent(src, shapes, starts, cfg.weights, cfg, record)

    rates = cands.all_rates()
    keep = frontier_indices(rates)
    pts = [RateTriple(*(float(v) for v in rates[i])) for i in keep]
    return RegionFrontier(pts, [cands.aux(i) for i in keep])


# ---------------------------------------------------------------------------
# special cases

@dataclass
class CorollaryReport:
    case: str
    ordering: tuple[str, ...]
    kind: str  # "capacity", "zero" or "inner_bound_only"
    description: str
    capacity: RateTriple | None = None
    frontier: RegionFrontier | None = None
    matches: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"case": self.case, "ordering": list(self.ordering), "kind": self.kind,
                "description": self.description,
                "capacity": None if self.capacity is None else list(self.capacity),
                "frontier": None if self.frontier is None else [list(p) for p in self.frontier.points],
                "matches": self.matches}


# (label, chain, how the region is obtained)
COROLLARY_CASES: Sequence[tuple[str, tuple[str, ...], str]] = (
    ("all-zero", ("X3", "X4", "X1", "X2"), "zero"),
    ("all-zero", ("X3", "X4", "X2", "X1"), "zero"),
    ("Corollary 1", ("X3", "X1", "X4", "X2"), "pk1"),
    ("Corollary 1 (mirrored)", ("X3", "X2", "X4", "X1"), "pk2"),
    ("Corollary 2", ("X1", "X3", "X4", "X2"), "pk1"),
    ("Corollary 2 (mirrored)", ("X2", "X3", "X4", "X1"), "pk2"),
    ("Corollary 3", ("X3", "X1", "X2", "X4"), "search"),
    ("Corollary 3 (mirrored)", ("X3", "X2", "X1", "X4"), "search"),
    ("Corollary 4", ("X2", "X1", "X3", "X4"), "search"),
    ("Corollary 4 (mirrored)", ("X1", "X2", "X3", "X4"), "search"),
    ("Corollary 5", ("X2", "X3", "X1", "X4"), "inner"),
    ("Corollary 5 (mirrored)", ("X1", "X3", "X2", "X4"), "inner"),
)


def corollary_capacity(pmf: JointPmf4, tol: float = 1e-6, cfg: SearchConfig | None = None,
                       threads: int = 1) -> CorollaryReport | None:
    """Detect a special Markov structure and report its region.

    Cases are tried in ``COROLLARY_CASES`` order; the first match is
    reported and every matching label is listed in ``matches``.
    """
    matches = [(label, chain, how) for label, chain, how in COROLLARY_CASES
               if is_markov_chain(pmf, chain, tol)]
    if not matches:
        return None
    label, chain, how = matches[0]
    names = [m[0] + " " + "-".join(m[1]) for m in matches]
    if how == "zero":
        return CorollaryReport(label, chain, "zero", "R0 = R1 = R2 = 0",
                               capacity=RateTriple(0.0, 0.0, 0.0), matches=names)
    if how in ("pk1", "pk2"):
        own = "X1" if how == "pk1" else "X2"
        v = cmi(pmf, ["X3"], [own], ["X4"])
        if how == "pk1":
            cap, text = RateTriple(0.0, v, 0.0), f"R0 = 0, R2 = 0, 0 <= R1 <= I(X3;X1|X4) = {v!r}"
        else:
            cap, text = RateTriple(0.0, 0.0, v), f"R0 = 0, R1 = 0, 0 <= R2 <= I(X3;X2|X4) = {v!r}"
        return CorollaryReport(label, chain, "capacity", text, capacity=cap, matches=names)
    frontier = search_inner_region(pmf, cfg, threads=threads)
    if how == "search":
        text = "capacity region = inner-bound frontier over auxiliaries"
        kind = "capacity"
    else:
        text = "achievable (inner bound only)"
        kind = "inner_bound_only"
    return CorollaryReport(label, chain, kind, text, frontier=frontier, matches=names)
