"""Joint distributions of the four-terminal source.

Tables are numpy arrays with one axis per named variable.  The source
joint uses axes ``(X1, X2, X3, X4)``; the auxiliary extension uses
``(Q, U0, U1, U2, X1, X2, X3, X4)``.  A flat ``probs`` vector is the
C-order ravel of the table, i.e. index ``((x1*|X2|+x2)*|X3|+x3)*|X4|+x4``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    BadSubset,
    NegativeProbability,
    NonFiniteProbability,
    NotNormalized,
    OverlappingSets,
    PmfFormatError,
    ShapeMismatch,
)

SOURCE_NAMES = ("X1", "X2", "X3", "X4")
EXTENDED_NAMES = ("Q", "U0", "U1", "U2", "X1", "X2", "X3", "X4")

# Input tolerance; accepted tables are renormalized afterwards.
NORM_TOL = 1e-9


def _validated(table, shape=None):
    t = np.array(table, dtype=np.float64)
    if shape is not None and t.size != math.prod(shape):
        raise ShapeMismatch(f"expected {math.prod(shape)} entries, got {t.size}")
    if shape is not None:
        t = t.reshape(shape)
    if not np.all(np.isfinite(t)):
        raise NonFiniteProbability("probability table contains NaN or inf")
    if np.any(t < 0):
        raise NegativeProbability(f"negative entry {float(t.min())!r}")
    s = t.sum()
    if abs(s - 1.0) > NORM_TOL:
        raise NotNormalized(f"entries sum to {float(s)!r}")
    return t / s


class DiscretePmf:
    """Probability table whose axes carry variable names."""

    __slots__ = ("names", "table")

    def __init__(self, names: Sequence[str], table: np.ndarray, *, validate: bool = True):
        names = tuple(names)
        t = _validated(table) if validate else np.asarray(table, dtype=np.float64).copy()
        if t.ndim != len(names):
            raise ShapeMismatch(f"{t.ndim} axes for {len(names)} names")
        if len(set(names)) != len(names):
            raise BadSubset(f"duplicate variable names {names}")
        t.setflags(write=False)
        self.names = names
        self.table = t

    @property
    def alphabet_sizes(self) -> tuple[int, ...]:
        return self.table.shape

    @property
    def probs(self) -> np.ndarray:
        return self.table.ravel()

    def size_of(self, name: str) -> int:
        return self.table.shape[self.names.index(name)]

    def axes(self, variables) -> tuple[int, ...]:
        """Resolve variable names (or axis integers) to axis positions."""
        if isinstance(variables, (str, int, np.integer)):
            variables = (variables,)
        out = []
        for v in variables:
            if isinstance(v, (int, np.integer)):
                if not 0 <= v < len(self.names):
                    raise BadSubset(f"axis {v} out of range")
                out.append(int(v))
            elif v in self.names:
                out.append(self.names.index(v))
            else:
                raise BadSubset(f"unknown variable {v!r}; have {self.names}")
        if len(set(out)) != len(out):
            raise BadSubset(f"repeated variable in {variables}")
        return tuple(out)

    def __repr__(self):
        return f"{type(self).__name__}(names={self.names}, sizes={self.alphabet_sizes})"


class JointPmf4(DiscretePmf):
    """Joint PMF of the four terminal observations (X1, X2, X3, X4)."""

    __slots__ = ()

    def __init__(self, table: np.ndarray, *, validate: bool = True):
        super().__init__(SOURCE_NAMES, table, validate=validate)

    def to_json(self) -> str:
        return json.dumps({"alphabet_sizes": list(self.alphabet_sizes),
                           "probs": [float(p) for p in self.probs]})


class ExtendedPmf(DiscretePmf):
    """Joint PMF of (Q, U0, U1, U2, X1, X2, X3, X4)."""

    __slots__ = ()

    def __init__(self, table: np.ndarray, *, validate: bool = True):
        super().__init__(EXTENDED_NAMES, table, validate=validate)


def new_joint_pmf(sizes: Sequence[int], probs) -> JointPmf4:
    """Validate sizes and a flat probability vector and build a JointPmf4."""
    sizes = tuple(int(s) for s in sizes)
    if len(sizes) != 4 or any(s < 1 for s in sizes):
        raise ShapeMismatch(f"need four alphabet sizes >= 1, got {sizes}")
    return JointPmf4(_validated(probs, sizes), validate=False)


def load_pmf(path) -> JointPmf4:
    """Read the JSON PMF format ``{"alphabet_sizes": [...], "probs": [...]}``.

    Raises PmfFormatError for unreadable or malformed files and a PmfError
    subclass when the content is not a valid distribution.
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise PmfFormatError(f"cannot read {path}: {exc}") from exc
    return parse_pmf(text, source=str(path))


def _reject_constant(name):
    raise NonFiniteProbability(f"non-finite literal {name} in PMF file")


def parse_pmf(text: str, source: str = "<string>") -> JointPmf4:
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise PmfFormatError(f"{source}: invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "alphabet_sizes" not in doc or "probs" not in doc:
        raise PmfFormatError(f"{source}: expected keys 'alphabet_sizes' and 'probs'")
    sizes, probs = doc["alphabet_sizes"], doc["probs"]
    if not isinstance(sizes, list) or not all(isinstance(s, int) for s in sizes):
        raise PmfFormatError(f"{source}: alphabet_sizes must be a list of integers")
    if not isinstance(probs, list) or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs):
        raise PmfFormatError(f"{source}: probs must be a list of numbers")
    return new_joint_pmf(sizes, probs)


def save_pmf(pmf: JointPmf4, path) -> None:
    Path(path).write_text(pmf.to_json() + "\n")


def marginal(pmf: DiscretePmf, keep) -> DiscretePmf:
    """Exact marginal over ``keep``, with axes in the order given."""
    axes = pmf.axes(keep)
    if not axes:
        raise BadSubset("cannot marginalize onto the empty set")
    drop = tuple(a for a in range(pmf.table.ndim) if a not in axes)
    t = pmf.table.sum(axis=drop) if drop else pmf.table
    kept_sorted = sorted(axes)
    t = np.transpose(t, [kept_sorted.index(a) for a in axes])
    return DiscretePmf([pmf.names[a] for a in axes], t, validate=False)


@dataclass(frozen=True)
class ConditionalTable:
    """p(target | given) laid out with the given axes first.

    Rows whose conditioning event has probability zero are NaN and marked
    False in ``defined``.
    """

    target: tuple[str, ...]
    given: tuple[str, ...]
    table: np.ndarray
    defined: np.ndarray

    def row(self, *given_values) -> np.ndarray:
        return self.table[tuple(given_values)]


def conditional(pmf: DiscretePmf, target, given) -> ConditionalTable:
    t_axes, g_axes = pmf.axes(target), pmf.axes(given) if given else ()
    if set(t_axes) & set(g_axes):
        raise OverlappingSets(f"{target} and {given} overlap")
    if not t_axes:
        raise BadSubset("empty target set")
    joint = marginal(pmf, g_axes + t_axes).table
    if g_axes:
        denom = joint.sum(axis=tuple(range(len(g_axes), joint.ndim)))
    else:
        denom = np.array(joint.sum())
    defined = denom > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = joint / denom.reshape(denom.shape + (1,) * len(t_axes))
    cond[~defined] = np.nan
    names = pmf.names
    return ConditionalTable(tuple(names[a] for a in t_axes), tuple(names[a] for a in g_axes),
                            cond, defined)


@dataclass(frozen=True, eq=False)
class AuxChannelSet:
    """Auxiliary channels p(u0|x3), p(u1|u0,x3), p(u2|u0,x3), p(q|u0,u1,u2).

    Array layouts: ``ch_u0[x3, u0]``, ``ch_u1[u0, x3, u1]``,
    ``ch_u2[u0, x3, u2]``, ``ch_q[u0, u1, u2, q]``.
    """

    ch_u0: np.ndarray
    ch_u1: np.ndarray
    ch_u2: np.ndarray
    ch_q: np.ndarray

    def __post_init__(self):
        tabs = {}
        for name in ("ch_u0", "ch_u1", "ch_u2", "ch_q"):
            t = np.array(getattr(self, name), dtype=np.float64)
            if not np.all(np.isfinite(t)):
                raise NonFiniteProbability(f"{name} has non-finite entries")
            if np.any(t < 0):
                raise NegativeProbability(f"{name} has negative entries")
            rows = t.sum(axis=-1)
            if np.any(np.abs(rows - 1.0) > NORM_TOL):
                raise NotNormalized(f"{name} rows do not sum to one")
            t = t / rows[..., None]
            t.setflags(write=False)
            tabs[name] = t
        u0, u1, u2, q = tabs["ch_u0"], tabs["ch_u1"], tabs["ch_u2"], tabs["ch_q"]
        if u0.ndim != 2 or u1.ndim != 3 or u2.ndim != 3 or q.ndim != 4:
            raise ShapeMismatch("auxiliary tables have the wrong number of axes")
        x3, c0 = u0.shape
        if u1.shape[:2] != (c0, x3) or u2.shape[:2] != (c0, x3):
            raise ShapeMismatch("p(u1|u0,x3) / p(u2|u0,x3) disagree with p(u0|x3)")
        if q.shape[:3] != (c0, u1.shape[2], u2.shape[2]):
            raise ShapeMismatch("p(q|u0,u1,u2) disagrees with the U cardinalities")
        for k, v in tabs.items():
            object.__setattr__(self, k, v)

    @property
    def card_u0(self) -> int:
        return self.ch_u0.shape[1]

    @property
    def card_u1(self) -> int:
        return self.ch_u1.shape[2]

    @property
    def card_u2(self) -> int:
        return self.ch_u2.shape[2]

    @property
    def card_q(self) -> int:
        return self.ch_q.shape[3]

    @property
    def x3_size(self) -> int:
        return self.ch_u0.shape[0]

    @classmethod
    def trivial(cls, x3_size: int) -> "AuxChannelSet":
        """All auxiliaries constant."""
        return cls(np.ones((x3_size, 1)), np.ones((1, x3_size, 1)),
                   np.ones((1, x3_size, 1)), np.ones((1, 1, 1, 1)))

    @classmethod
    def from_maps(cls, x3_size, u0_of=None, u1_of=None, u2_of=None,
                  card_u0=None, card_u1=None, card_u2=None) -> "AuxChannelSet":
        """Deterministic auxiliaries from python callables.

        ``u0_of(x3)``, ``u1_of(u0, x3)``, ``u2_of(u0, x3)``; a missing map
        means that auxiliary is constant.  |Q| = 1.
        """
        c0 = card_u0 or (x3_size if u0_of else 1)
        c1 = card_u1 or (x3_size if u1_of else 1)
        c2 = card_u2 or (x3_size if u2_of else 1)
        a0 = np.zeros((x3_size, c0))
        a1 = np.zeros((c0, x3_size, c1))
        a2 = np.zeros((c0, x3_size, c2))
        for x in range(x3_size):
            a0[x, u0_of(x) if u0_of else 0] = 1.0
            for u in range(c0):
                a1[u, x, u1_of(u, x) if u1_of else 0] = 1.0
                a2[u, x, u2_of(u, x) if u2_of else 0] = 1.0
        return cls(a0, a1, a2, np.ones((c0, c1, c2, 1)))

    @classmethod
    def identity_u0(cls, x3_size: int) -> "AuxChannelSet":
        """U0 = X3; U1, U2 and Q constant."""
        return cls.from_maps(x3_size, u0_of=lambda x: x)

    def to_dict(self) -> dict:
        return {"card_u0": self.card_u0, "card_u1": self.card_u1,
                "card_u2": self.card_u2, "card_q": self.card_q,
                "ch_u0": self.ch_u0.tolist(), "ch_u1": self.ch_u1.tolist(),
                "ch_u2": self.ch_u2.tolist(), "ch_q": self.ch_q.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "AuxChannelSet":
        try:
            return cls(np.asarray(d["ch_u0"], float), np.asarray(d["ch_u1"], float),
                       np.asarray(d["ch_u2"], float), np.asarray(d["ch_q"], float))
        except KeyError as exc:
            raise PmfFormatError(f"aux tables missing {exc}") from exc


def extend_with_aux(pmf: JointPmf4, aux: AuxChannelSet) -> ExtendedPmf:
    """Joint of (Q,U0,U1,U2,X1,X2,X3,X4) under the auxiliary factorization."""
    if aux.x3_size != pmf.alphabet_sizes[2]:
        raise ShapeMismatch(f"aux built for |X3|={aux.x3_size}, pmf has {pmf.alphabet_sizes[2]}")
    t = np.einsum("abcq,za,azb,azc,xyzw->qabcxyzw",
                  aux.ch_q, aux.ch_u0, aux.ch_u1, aux.ch_u2, pmf.table, optimize=True)
    return ExtendedPmf(t, validate=False)


def is_markov_chain(pmf: DiscretePmf, ordering: Sequence[str], tol: float = 1e-6) -> bool:
    """True when ``A - B - C - D`` holds within ``tol`` bits.

    Checks I(A; C,D | B) <= tol and I(A,B; D | C) <= tol.
    """
    from .info import conditional_mutual_information as cmi

    a, b, c, d = ordering
    if sorted(ordering) != sorted(pmf.names) or len(ordering) != 4:
        raise BadSubset(f"ordering {ordering} is not a permutation of {pmf.names}")
    return cmi(pmf, [a], [c, d], [b]) <= tol and cmi(pmf, [a, b], [d], [c]) <= tol


@dataclass(frozen=True, eq=False)
class SourceBlock:
    """n i.i.d. draws observed by the four terminals."""

    n: int
    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    x4: np.ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        return getattr(self, name.lower())

    def __eq__(self, other):
        if not isinstance(other, SourceBlock):
            return NotImplemented
        return self.n == other.n and all(
            np.array_equal(self[v], other[v]) for v in SOURCE_NAMES)


def sample_iid(pmf: JointPmf4, n: int, seed) -> SourceBlock:
    """Draw a SourceBlock of length ``n``; ``seed`` is anything numpy accepts."""
    if n < 1:
        raise ValueError("blocklength must be >= 1")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(pmf.probs)
    cdf[-1] = 1.0
    flat = np.searchsorted(cdf, rng.random(n), side="right")
    flat = np.minimum(flat, cdf.size - 1)
    xs = np.unravel_index(flat, pmf.alphabet_sizes)
    return SourceBlock(n, *(x.astype(np.int64) for x in xs))
