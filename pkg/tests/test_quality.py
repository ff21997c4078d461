"""Quality functions: zero, modular, coverage."""

import numpy as np
import pytest

from divmax import QualityFunction, value, marginal, marginal_pair
from divmax.quality import QualityState

K1 = frozenset({"s1", "s2"})
K2 = frozenset({"s2", "s3"})


def test_zero_kind():
    q = QualityFunction.zero()
    assert value(q, [0, 5, 9]) == 0.0
    assert marginal(q, [0], 1) == 0.0


def test_modular_value():
    q = QualityFunction.modular([1.0, 2.0, 3.0])
    assert value(q, [0, 2]) == pytest.approx(4.0)
    assert value(q, []) == 0.0


def test_coverage_value():
    q = QualityFunction.coverage([K1, K2])
    assert value(q, [0, 1]) == pytest.approx(3.0)
    assert value(q, [0]) == pytest.approx(2.0)


def test_marginal_coverage_overlap():
    q = QualityFunction.coverage([K1, K2])
    # only s3 is new once k1 is in
    assert marginal(q, [0], 1) == pytest.approx(1.0)


def test_marginal_modular_independent_of_set():
    q = QualityFunction.modular([1.0, 2.0, 5.0])
    assert marginal(q, [], 2) == pytest.approx(5.0)
    assert marginal(q, [0, 1], 2) == pytest.approx(5.0)


def test_marginal_of_selected_element_is_zero():
    q = QualityFunction.modular([1.0, 2.0])
    assert marginal(q, [1], 1) == 0.0


def test_marginal_pair_coverage():
    q = QualityFunction.coverage([K1, K2])
    assert marginal_pair(q, [], 0, 1) == pytest.approx(3.0)


def test_marginal_pair_modular():
    q = QualityFunction.modular([1.0, 2.0])
    assert marginal_pair(q, [], 0, 1) == pytest.approx(3.0)


def test_marginal_pair_idempotent():
    q = QualityFunction.modular([1.0, 2.0])
    assert marginal_pair(q, [0, 1], 0, 1) == 0.0


def test_marginal_pair_rejects_equal_ids():
    q = QualityFunction.zero()
    with pytest.raises(ValueError):
        marginal_pair(q, [], 3, 3)


def test_serialization_roundtrip():
    for q in (QualityFunction.zero(),
              QualityFunction.modular([0.5, 1.5]),
              QualityFunction.coverage([K1, K2])):
        again = QualityFunction.from_dict(q.to_dict())
        assert again.kind == q.kind
        assert value(again, [0, 1]) == value(q, [0, 1])


def test_invalid_kind_rejected():
    with pytest.raises(ValueError):
        QualityFunction(kind="spectral")


def test_state_tracks_plain_functions():
    rng = np.random.default_rng(9)
    covers = [frozenset(rng.choice(12, size=3).tolist()) for _ in range(15)]
    for q in (QualityFunction.modular(rng.random(15)),
              QualityFunction.coverage(covers)):
        st = QualityState(q, 15)
        sel = []
        for v in rng.permutation(15)[:8]:
            v = int(v)
            assert st.marginal(v) == pytest.approx(marginal(q, sel, v))
            st.add(v)
            sel.append(v)
            assert st.value() == pytest.approx(value(q, sel))
        for v in list(sel[:3]):
            st.remove(v)
            sel.remove(v)
            assert st.value() == pytest.approx(value(q, sel))


def test_state_marginal_vec():
    q = QualityFunction.coverage([K1, K2, frozenset({"s9"})])
    st = QualityState(q, 3)
    st.add(0)
    vec = st.marginal_vec(np.array([0, 1, 2]))
    assert vec[0] == 0.0
    assert vec[1] == pytest.approx(1.0)
    assert vec[2] == pytest.approx(1.0)


def test_monotone_and_submodular_sampled():
    rng = np.random.default_rng(31)
    covers = [frozenset(rng.choice(8, size=2).tolist()) for _ in range(10)]
    q = QualityFunction.coverage(covers)
    for _ in range(300):
        pool = rng.permutation(10)
        a = int(rng.integers(0, 5))
        b = int(rng.integers(a, 9))
        A = [int(x) for x in pool[:a]]
        B = [int(x) for x in pool[:b]]
        v = int(pool[9])
        mA = marginal(q, A, v)
        mB = marginal(q, B, v)
        assert mA >= 0.0
        assert mA >= mB - 1e-12
