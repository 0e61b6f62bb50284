"""Canonical test sources.

``chain_b(p, q, r, ordering)`` builds a binary Markov chain A - B - C - D
with A uniform and each successor equal to its predecessor XOR an
independent Bernoulli flip (p, then q, then r).  ``ordering`` names the
terminals playing A, B, C, D.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .dmms import SOURCE_NAMES, AuxChannelSet, JointPmf4, save_pmf

COR1 = ("X3", "X1", "X4", "X2")
COR1_MIRROR = ("X3", "X2", "X4", "X1")
COR2 = ("X1", "X3", "X4", "X2")
COR2_MIRROR = ("X2", "X3", "X4", "X1")
COR3 = ("X3", "X1", "X2", "X4")
COR3_MIRROR = ("X3", "X2", "X1", "X4")
COR4 = ("X2", "X1", "X3", "X4")
COR4_MIRROR = ("X1", "X2", "X3", "X4")
COR5 = ("X2", "X3", "X1", "X4")
COR5_MIRROR = ("X1", "X3", "X2", "X4")
ZERO_A = ("X3", "X4", "X1", "X2")
ZERO_B = ("X3", "X4", "X2", "X1")
ORDERINGS = (COR1, COR1_MIRROR, COR2, COR2_MIRROR, COR3, COR3_MIRROR, COR4, COR4_MIRROR,
             COR5, COR5_MIRROR, ZERO_A, ZERO_B)


def _bsc(e):
    return np.array([[1 - e, e], [e, 1 - e]])


def chain_b(p=0.1, q=0.1, r=0.1, ordering=COR3) -> JointPmf4:
    if sorted(ordering) != sorted(SOURCE_NAMES):
        raise ValueError(f"ordering {ordering} must permute {SOURCE_NAMES}")
    abcd = np.einsum("a,ab,bc,cd->abcd", np.full(2, 0.5), _bsc(p), _bsc(q), _bsc(r))
    perm = [ordering.index(name) for name in SOURCE_NAMES]
    return JointPmf4(np.transpose(abcd, perm))


def independent(sizes=(2, 2, 2, 2)) -> JointPmf4:
    t = np.ones(sizes)
    return JointPmf4(t / t.sum())


def equal_x123() -> JointPmf4:
    """X1 = X2 = X3 uniform bit, X4 an independent uniform bit."""
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        t[x, x, x, :] = 0.25
    return JointPmf4(t)


def random_pmf(seed, sizes=(2, 2, 2, 2)) -> JointPmf4:
    """A dense pseudo-random joint (Dirichlet(1) over all cells)."""
    rng = np.random.default_rng(seed)
    return JointPmf4(rng.dirichlet(np.ones(int(np.prod(sizes)))).reshape(sizes))


FIXTURE_PMFS = {
    "chainb_cor1": lambda: chain_b(ordering=COR1),
    "chainb_cor1_mirror": lambda: chain_b(ordering=COR1_MIRROR),
    "chainb_cor2": lambda: chain_b(ordering=COR2),
    "chainb_cor2_mirror": lambda: chain_b(ordering=COR2_MIRROR),
    "chainb_cor3": lambda: chain_b(ordering=COR3),
    "chainb_cor3_mirror": lambda: chain_b(ordering=COR3_MIRROR),
    "chainb_cor4": lambda: chain_b(ordering=COR4),
    "chainb_cor4_mirror": lambda: chain_b(ordering=COR4_MIRROR),
    "chainb_cor5": lambda: chain_b(ordering=COR5),
    "chainb_zero_a": lambda: chain_b(ordering=ZERO_A),
    "chainb_zero_b": lambda: chain_b(ordering=ZERO_B),
    "independent": independent,
    "equal_x123": equal_x123,
    "generic": lambda: random_pmf(12345),
}

# Codec operating point shared by the simulate CLI fixture and the acceptance sweep.
COR3_SIM_CONFIG = {
    "pmf": "chainb_cor3.json",
    "aux": "identity-u0",
    "n": [8, 12, 16],
    "eps1": 0.15,
    "typ_eps": 0.25,
    "backoff": 0.25,
    "trials": 2000,
    "seed": 0,
}

TRIVIAL_SIM_CONFIG = {
    "pmf": "degenerate.json",
    "aux": "identity-u0",
    "n": [4],
    "eps1": 0.0,
    "typ_eps": 0.05,
    "backoff": 0.25,
    "trials": 20,
    "seed": 0,
}


def cor3_codec_aux() -> AuxChannelSet:
    return AuxChannelSet.identity_u0(2)


def write_fixture_files(directory) -> None:
    """Regenerate the JSON files shipped in ``fixtures/``."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, make in FIXTURE_PMFS.items():
        save_pmf(make(), d / f"{name}.json")
    save_pmf(JointPmf4(np.ones((1, 1, 1, 1))), d / "degenerate.json")
    (d / "sim_cor3.json").write_text(json.dumps(COR3_SIM_CONFIG, indent=2) + "\n")
    (d / "sim_trivial.json").write_text(json.dumps(TRIVIAL_SIM_CONFIG, indent=2) + "\n")


if __name__ == "__main__":
    import sys

    write_fixture_files(sys.argv[1] if len(sys.argv) > 1 else "fixtures")
