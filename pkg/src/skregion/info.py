"""Shannon quantities in bits on discrete tables, plus plug-in estimators.

Variables are given either as names (when the joint is a ``DiscretePmf``)
or as axis integers (plain arrays).  Axes not mentioned in a query are
summed out, so every call works on any joint that contains the variables.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import entr

from .dmms import DiscretePmf
from .errors import BadPartition, EmptySample, InformationError, NotNormalized

LN2 = math.log(2.0)
# Negative MI within this band is round-off and is clamped to zero.
CLAMP_TOL = 1e-9


def _h(t: np.ndarray) -> float:
    return float(entr(t).sum() / LN2)


def entropy(table) -> float:
    """H(p) = -sum p log2 p, with 0 log 0 = 0."""
    t = np.asarray(table.table if isinstance(table, DiscretePmf) else table, dtype=np.float64)
    if t.size == 0 or abs(t.sum() - 1.0) > 1e-9 or np.any(t < 0):
        raise NotNormalized("entropy needs a probability table")
    return max(_h(t), 0.0)


def _axes_of(joint, variables):
    if isinstance(joint, DiscretePmf):
        return joint.axes(variables) if variables else ()
    nd = np.ndim(joint)
    out = tuple(int(v) for v in variables)
    if any(not 0 <= v < nd for v in out):
        raise BadPartition(f"axes {out} out of range for a {nd}-d table")
    return out


def _table(joint) -> np.ndarray:
    return joint.table if isinstance(joint, DiscretePmf) else np.asarray(joint, dtype=np.float64)


def _joint_entropy(t: np.ndarray, axes) -> float:
    if not axes:
        return 0.0
    drop = tuple(a for a in range(t.ndim) if a not in axes)
    return _h(t.sum(axis=drop) if drop else t)


def _clamp(v: float) -> float:
    if v < -CLAMP_TOL:
        raise InformationError(f"information measure {v!r} is negative")
    return max(v, 0.0)


def conditional_entropy(joint, a, given=()) -> float:
    """H(A | C)."""
    ax, cx = _axes_of(joint, a), _axes_of(joint, given)
    if set(ax) & set(cx):
        raise BadPartition("target and conditioning sets overlap")
    t = _table(joint)
    return _clamp(_joint_entropy(t, ax + cx) - _joint_entropy(t, cx))


def mutual_information(joint, a, b) -> float:
    """I(A; B) = H(A) + H(B) - H(A, B)."""
    return conditional_mutual_information(joint, a, b, ())


def conditional_mutual_information(joint, a, b, c=()) -> float:
    """I(A; B | C) via H(AC) + H(BC) - H(ABC) - H(C)."""
    ax, bx, cx = _axes_of(joint, a), _axes_of(joint, b), _axes_of(joint, c)
    if not ax or not bx:
        raise BadPartition("both sides of a mutual information need variables")
    if set(ax) & set(bx) or set(ax) & set(cx) or set(bx) & set(cx):
        raise BadPartition(f"variable sets {a}, {b}, {c} are not disjoint")
    t = _table(joint)
    v = (_joint_entropy(t, ax + cx) + _joint_entropy(t, bx + cx)
         - _joint_entropy(t, ax + bx + cx) - _joint_entropy(t, cx))
    return _clamp(v)


def empirical_joint(*samples, sizes=None) -> np.ndarray:
    """Normalized histogram of paired integer samples."""
    if not samples or len(samples[0]) == 0:
        raise EmptySample("need at least one sample")
    arrs = [np.asarray(s, dtype=np.int64).ravel() for s in samples]
    if len({a.size for a in arrs}) != 1:
        raise BadPartition("paired samples have different lengths")
    if sizes is None:
        sizes = tuple(int(a.max()) + 1 for a in arrs)
    flat = np.ravel_multi_index(arrs, sizes)
    counts = np.bincount(flat, minlength=math.prod(sizes)).reshape(sizes)
    return counts / arrs[0].size


def empirical_entropy(samples, size=None) -> float:
    """Plug-in entropy of an integer sample."""
    return entropy(empirical_joint(samples, sizes=None if size is None else (size,)))


def empirical_mi(a, b, sizes=None) -> float:
    """Plug-in (maximum-likelihood) I(A;B) from paired samples, no bias correction."""
    p = empirical_joint(a, b, sizes=sizes)
    return mutual_information(p, [0], [1])
