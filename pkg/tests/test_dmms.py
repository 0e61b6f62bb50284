import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracle
from skregion.dmms import (
    AuxChannelSet,
    JointPmf4,
    conditional,
    extend_with_aux,
    is_markov_chain,
    load_pmf,
    marginal,
    new_joint_pmf,
    parse_pmf,
    sample_iid,
    save_pmf,
)
from skregion.errors import (
    BadSubset,
    NegativeProbability,
    NonFiniteProbability,
    NotNormalized,
    OverlappingSets,
    PmfFormatError,
    ShapeMismatch,
)
from skregion.fixtures import COR3, ORDERINGS, chain_b, equal_x123, random_pmf


def test_uniform_pmf_is_valid():
    pmf = new_joint_pmf((2, 2, 2, 2), [1 / 16] * 16)
    assert pmf.alphabet_sizes == (2, 2, 2, 2)
    assert pmf.probs.sum() == pytest.approx(1.0, abs=1e-12)


def test_unnormalized_rejected():
    probs = [1 / 16] * 16
    probs[0] -= 0.02
    with pytest.raises(NotNormalized):
        new_joint_pmf((2, 2, 2, 2), probs)


def test_degenerate_pmf():
    pmf = new_joint_pmf((1, 1, 1, 1), [1.0])
    assert pmf.table.shape == (1, 1, 1, 1)


@pytest.mark.parametrize("sizes, probs, exc", [
    ((2, 2, 2), [0.125] * 8, ShapeMismatch),
    ((2, 2, 2, 0), [], ShapeMismatch),
    ((2, 1, 1, 1), [0.5], ShapeMismatch),
    ((2, 1, 1, 1), [1.5, -0.5], NegativeProbability),
    ((2, 1, 1, 1), [float("nan"), 1.0], NonFiniteProbability),
])
def test_invalid_tables(sizes, probs, exc):
    with pytest.raises(exc):
        new_joint_pmf(sizes, probs)


def test_json_roundtrip(tmp_path):
    pmf = random_pmf(7)
    save_pmf(pmf, tmp_path / "p.json")
    back = load_pmf(tmp_path / "p.json")
    assert np.array_equal(back.table, pmf.table)


@pytest.mark.parametrize("text, exc", [
    ("{not json", PmfFormatError),
    ('{"alphabet_sizes": [1,1,1,1]}', PmfFormatError),
    ('{"alphabet_sizes": [1,1,1,1], "probs": ["a"]}', PmfFormatError),
    ('{"alphabet_sizes": [1,1,1,1], "probs": [NaN]}', NonFiniteProbability),
    ('[1, 2]', PmfFormatError),
])
def test_parse_errors(text, exc):
    with pytest.raises(exc):
        parse_pmf(text)


def test_missing_file_is_format_error(tmp_path):
    with pytest.raises(PmfFormatError):
        load_pmf(tmp_path / "nope.json")


def test_marginal_examples():
    uni = new_joint_pmf((2, 2, 2, 2), [1 / 16] * 16)
    assert np.allclose(marginal(uni, ["X1"]).table, [0.5, 0.5])
    pmf = random_pmf(1)
    assert np.array_equal(marginal(pmf, ["X1", "X2", "X3", "X4"]).table, pmf.table)
    # axes follow the requested order
    assert np.allclose(marginal(pmf, ["X4", "X1"]).table, pmf.table.sum(axis=(1, 2)).T)


def test_marginal_matches_oracle_on_chain():
    src = oracle.chain_b_table(0.1, 0.1, 0.1, COR3)
    ref = oracle.marg(src, (2, 2, 2, 2), (2, 3))
    got = marginal(chain_b(ordering=COR3), ["X3", "X4"]).table
    for (a, b), p in ref.items():
        assert got[a, b] == pytest.approx(p, abs=1e-12)


def test_marginal_rejects_bad_names():
    with pytest.raises(BadSubset):
        marginal(random_pmf(0), ["X9"])
    with pytest.raises(BadSubset):
        marginal(random_pmf(0), ["X1", "X1"])


def test_conditional_examples():
    c = conditional(equal_x123(), ["X1"], ["X3"])
    assert np.allclose(c.table, np.eye(2))
    uni = new_joint_pmf((2, 2, 2, 2), [1 / 16] * 16)
    assert np.allclose(conditional(uni, ["X1"], ["X2"]).table, 0.5)
    # X4 follows X2 through one 0.1 flip in X3-X1-X2-X4
    c = conditional(chain_b(ordering=COR3), ["X4"], ["X2"])
    assert np.allclose(c.table, [[0.9, 0.1], [0.1, 0.9]], atol=1e-12)
    with pytest.raises(OverlappingSets):
        conditional(uni, ["X1"], ["X1", "X2"])


def test_conditional_marks_undefined_rows():
    t = np.zeros((2, 1, 1, 1))
    t[0] = 1.0
    c = conditional(JointPmf4(t), ["X2"], ["X1"])
    assert c.defined.tolist() == [True, False]
    assert np.isnan(c.table[1]).all()


def test_trivial_aux_extension():
    pmf = random_pmf(2)
    ext = extend_with_aux(pmf, AuxChannelSet.trivial(2))
    assert ext.table.shape == (1, 1, 1, 1, 2, 2, 2, 2)
    assert np.allclose(ext.table.reshape(2, 2, 2, 2), pmf.table)


def test_identity_u0_is_diagonal():
    ext = extend_with_aux(random_pmf(3), AuxChannelSet.identity_u0(2))
    m = marginal(ext, ["U0", "X3"]).table
    assert m[0, 1] == 0 and m[1, 0] == 0


def test_random_aux_preserves_source():
    rng = np.random.default_rng(5)
    aux = AuxChannelSet(rng.dirichlet(np.ones(3), size=2), rng.dirichlet(np.ones(2), size=(3, 2)),
                        rng.dirichlet(np.ones(2), size=(3, 2)),
                        rng.dirichlet(np.ones(2), size=(3, 2, 2)))
    pmf = chain_b(ordering=COR3)
    ext = extend_with_aux(pmf, aux)
    assert np.abs(ext.table.sum(axis=(0, 1, 2, 3)) - pmf.table).max() <= 1e-12


def test_aux_validation():
    with pytest.raises(NotNormalized):
        AuxChannelSet(np.array([[0.5, 0.6], [1, 0]]), np.ones((2, 2, 1)), np.ones((2, 2, 1)),
                      np.ones((2, 1, 1, 1)))
    with pytest.raises(ShapeMismatch):
        AuxChannelSet(np.eye(2), np.ones((3, 2, 1)), np.ones((2, 2, 1)), np.ones((2, 1, 1, 1)))


def test_aux_dict_roundtrip():
    aux = AuxChannelSet.identity_u0(3)
    back = AuxChannelSet.from_dict(json.loads(json.dumps(aux.to_dict())))
    assert np.array_equal(back.ch_u0, aux.ch_u0) and back.card_u0 == 3


@pytest.mark.parametrize("ordering", ORDERINGS)
def test_chain_construction_is_markov(ordering):
    assert is_markov_chain(chain_b(0.1, 0.2, 0.3, ordering), ordering)


def test_equal_sources_markov():
    assert is_markov_chain(equal_x123(), ("X3", "X1", "X2", "X4"))


def test_random_pmf_has_no_chain():
    import itertools

    pmf = random_pmf(12345)
    for order in itertools.permutations(("X1", "X2", "X3", "X4")):
        assert not is_markov_chain(pmf, order, 1e-6)
        a, b, c, d = (("X1", "X2", "X3", "X4").index(v) for v in order)
        assert max(oracle.cmi(pmf.table, (2, 2, 2, 2), [a], [c, d], [b]),
                   oracle.cmi(pmf.table, (2, 2, 2, 2), [a, b], [d], [c])) > 1e-6


def test_sampling():
    one = sample_iid(new_joint_pmf((1, 1, 1, 1), [1.0]), 5, 0)
    assert all((one[v] == 0).all() for v in ("X1", "X2", "X3", "X4"))
    pmf = equal_x123()
    assert sample_iid(pmf, 50, 9) == sample_iid(pmf, 50, 9)
    big = sample_iid(pmf, 100_000, 1)
    assert (big.x1 == big.x3).all()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 40))
def test_samples_stay_in_support(seed, n):
    t = np.zeros((2, 2, 2, 2))
    t[0, 1, 1, 0] = 0.3
    t[1, 0, 1, 1] = 0.7
    b = sample_iid(JointPmf4(t), n, seed)
    assert (t[b.x1, b.x2, b.x3, b.x4] > 0).all()
