"""Acceptance criteria, one test per check, each at its stated tolerance.

Every check records its outcome; the session summary folds them into one
pass/fail line per criterion (see conftest.py).
"""

import filecmp
import json
from pathlib import Path

import numpy as np
import pytest

import oracle
from conftest import ACCEPTANCE_RESULTS
from skregion.cli import main
from skregion.dmms import AuxChannelSet
from skregion.fixtures import (
    COR1,
    COR2,
    COR3,
    COR4,
    ZERO_A,
    ZERO_B,
    chain_b,
    random_pmf,
)
from skregion.info import conditional_entropy, conditional_mutual_information, entropy
from skregion.region import inner_bound_point, outer_bound, search_inner_region

SHAPE = (2, 2, 2, 2)
NAMES = ("X1", "X2", "X3", "X4")
SLACK = 0.02


def record(criterion, ok, detail):
    ACCEPTANCE_RESULTS.append((criterion, bool(ok), detail))
    assert ok, detail


def _subsets():
    idx = range(4)
    for a in idx:
        for b in idx:
            if b == a:
                continue
            rest = [c for c in idx if c not in (a, b)]
            yield [a], [b], []
            yield [a], [b], rest[:1]
            yield [a], [b], rest


def test_criterion_1_measures_vs_oracle():
    worst = 0.0
    for seed in range(50):
        pmf = random_pmf(1000 + seed)
        t = pmf.table
        worst = max(worst, abs(entropy(pmf) - oracle.H(t, SHAPE, (0, 1, 2, 3))))
        for a, b, c in _subsets():
            got = conditional_mutual_information(pmf, [NAMES[i] for i in a],
                                                 [NAMES[i] for i in b], [NAMES[i] for i in c])
            worst = max(worst, abs(got - oracle.cmi(t, SHAPE, a, b, c)))
            got = conditional_entropy(pmf, [NAMES[i] for i in a], [NAMES[i] for i in c])
            worst = max(worst, abs(got - oracle.cond_H(t, SHAPE, a, c)))
    record(1, worst <= 1e-9, f"50 random joints, max |error| = {worst:.2e} bits (tol 1e-9)")


def test_criterion_2_outer_vs_oracle():
    worst = 0.0
    for ordering in (COR1, COR2, COR3, COR4):
        want = oracle.outer_box(oracle.chain_b_table(0.1, 0.1, 0.1, ordering))
        got = outer_bound(chain_b(0.1, 0.1, 0.1, ordering))
        worst = max(worst, float(np.max(np.abs(np.array(got) - np.array(want)))))
    record(2, worst <= 1e-9, f"4 corollary orderings, max |error| = {worst:.2e} (tol 1e-9)")


def test_criterion_3_inner_within_outer():
    violations = 0
    for seed in range(100):
        pmf = random_pmf(seed)
        box = np.array(outer_bound(pmf))
        pts = np.array(search_inner_region(pmf).points)
        violations += int(np.any(pts > box + 1e-9, axis=1).sum())
    record(3, violations == 0, f"100 random PMFs, {violations} corner(s) outside the outer box")


def _i31_4(ordering):
    return oracle.cmi(oracle.chain_b_table(0.1, 0.1, 0.1, ordering), SHAPE, [2], [0], [3])


@pytest.mark.parametrize("label, ordering", [("Cor.1", COR1), ("Cor.2", COR2)])
def test_criterion_4_pk1_chains(label, ordering):
    want = _i31_4(ordering)
    got = search_inner_region(chain_b(ordering=ordering)).max_rates().r1
    record(4, abs(got - want) <= 0.02,
           f"[{label}] max frontier r1 = {got:.6f} vs I(X3;X1|X4) = {want:.6f} (tol 0.02)")


@pytest.mark.parametrize("ordering", [ZERO_A, ZERO_B])
def test_criterion_4_zero_chains(ordering):
    pts = search_inner_region(chain_b(ordering=ordering)).points
    ok = pts == [(0.0, 0.0, 0.0)]
    record(4, ok, f"[{'-'.join(ordering)}] frontier = {pts}")


@pytest.mark.parametrize("label, ordering", [("Cor.3", COR3), ("Cor.4", COR4)])
def test_criterion_4_formula_chains(label, ordering):
    # U0 = X3, U1 = X3, U2 constant
    aux = AuxChannelSet.from_maps(2, u0_of=lambda x: x, u1_of=lambda u, x: x)
    got = inner_bound_point(chain_b(ordering=ordering), aux)
    src = oracle.chain_b_table(0.1, 0.1, 0.1, ordering)
    ext = oracle.DictTable(oracle.extended_table(src, SHAPE, lambda x: x, lambda u, x: x,
                                                 lambda u, x: 0))
    s = (2, 2, 1) + SHAPE
    U0, U1, X1, X2, X4 = 0, 1, 3, 4, 6
    r0 = oracle.cmi(ext, s, [U0], [X2]) - oracle.cmi(ext, s, [U0], [X4])
    second = X2 if ordering == COR3 else X4
    r1 = oracle.cmi(ext, s, [U1], [X1], [U0]) - oracle.cmi(ext, s, [U1], [second], [U0])
    want = (max(r0, 0.0), max(r1, 0.0), 0.0)
    err = float(np.max(np.abs(np.array(got) - np.array(want))))
    record(4, err <= 1e-9, f"[{label}] corner {tuple(round(v, 6) for v in got)}, "
                             f"max |error| = {err:.1e} (tol 1e-9)")


def _non_increasing(values, slack=SLACK):
    return all(b <= a + slack for a, b in zip(values, values[1:]))


def _series(sweep, attr):
    return [getattr(sweep[n], attr) for n in sorted(sweep)]


def test_criterion_5_reliability_trend(cor3_sweep):
    ec, e1 = _series(cor3_sweep, "err_common"), _series(cor3_sweep, "err_pk1")
    ok = _non_increasing(ec) and _non_increasing(e1) and ec[-1] < 0.1
    record(5, ok, f"err_common(n=8,12,16) = {[round(v, 4) for v in ec]}, "
                  f"err_pk1 = {[round(v, 4) for v in e1]}; need non-increasing and "
                  f"err_common(16) < 0.1")


def test_criterion_6_secrecy_trend(cor3_sweep):
    le, lc = _series(cor3_sweep, "leak_eve_per_symbol"), _series(cor3_sweep, "leak_cross_21")
    ok = _non_increasing(le) and _non_increasing(lc) and le[-1] < 0.08 and lc[-1] < 0.08
    record(6, ok, f"leak_eve = {[round(v, 4) for v in le]}, "
                  f"leak_cross_21 = {[round(v, 4) for v in lc]} bits/symbol")


def test_criterion_7_uniformity(cor3_sweep):
    gaps = cor3_sweep[16].uniformity_gap
    record(7, max(gaps) < 0.1, f"n=16 uniformity gaps = {[round(g, 4) for g in gaps]} (< 0.1)")


def _payloads(out: Path):
    rec = {}
    for p in out.glob("*_record.json"):
        rec.update(json.loads(p.read_text())["payload"])
    return sorted(set(rec.values()))


def test_criterion_8_determinism(tmp_path, fixtures_dir):
    cfg = json.loads((fixtures_dir / "sim_cor3.json").read_text())
    cfg.update(pmf=str(fixtures_dir / cfg["pmf"]), n=[8, 10], trials=60)
    small = tmp_path / "sim_small.json"
    small.write_text(json.dumps(cfg))
    commands = [
        ["region", str(fixtures_dir / "generic.json")],
        ["outer", str(fixtures_dir / "chainb_cor3.json")],
        ["corollary", str(fixtures_dir / "chainb_cor4.json")],
        ["simulate", str(small)],
        ["check", str(fixtures_dir / "chainb_cor5.json")],
    ]
    mismatched = []
    for argv in commands:
        outs = []
        for run, threads in enumerate(("1", "1", "3")):
            out = tmp_path / f"{argv[0]}_{run}"
            assert main(argv + ["--seed", "5", "--threads", threads, "--out", str(out)]) == 0
            outs.append(out)
        names = _payloads(outs[0])
        assert names
        for other in outs[1:]:
            same, diff, err = filecmp.cmpfiles(outs[0], other, names, shallow=False)
            if diff or err:
                mismatched.append((argv[0], diff + err))
    record(8, not mismatched, f"5 commands x (rerun, --threads 3): mismatches {mismatched}")
