import math

import pytest
from hypothesis import given, strategies as st

from fracbinom.model import ProcessParams, Regime, classify, equilibrium_p


def test_classify_general():
    assert classify(ProcessParams(1, 1, 10, 5, 0.5)) is Regime.GENERAL


def test_classify_pure_birth():
    assert classify(ProcessParams(1, 0, 10, 5, 0.5)) is Regime.PURE_BIRTH


def test_classify_pure_death():
    assert classify(ProcessParams(0, 1, 10, 5, 0.5)) is Regime.PURE_DEATH


def test_equilibrium_p_values():
    assert equilibrium_p(ProcessParams(1, 1, 100, 40, 0.7)) == pytest.approx(0.5)
    assert equilibrium_p(ProcessParams(1, 3, 100, 40, 0.7)) == pytest.approx(0.25)
    assert equilibrium_p(ProcessParams(0, 1, 100, 40, 0.7)) == 0.0


def test_state_rates():
    p = ProcessParams(2, 3, 10, 4, 1.0)
    assert p.state_birth_rate(4) == pytest.approx(12.0)
    assert p.state_death_rate(4) == pytest.approx(12.0)
    assert p.total_rate == pytest.approx(5.0)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(birth_rate=-1, death_rate=1, ceiling=10, initial=5),
        dict(birth_rate=1, death_rate=-0.5, ceiling=10, initial=5),
        dict(birth_rate=0, death_rate=0, ceiling=10, initial=5),
        dict(birth_rate=1, death_rate=1, ceiling=0, initial=0),
        dict(birth_rate=1, death_rate=1, ceiling=10, initial=0),
        dict(birth_rate=1, death_rate=1, ceiling=10, initial=11),
        dict(birth_rate=1, death_rate=1, ceiling=10, initial=5, order=0.0),
        dict(birth_rate=1, death_rate=1, ceiling=10, initial=5, order=1.5),
        dict(birth_rate=1, death_rate=1, ceiling=10, initial=5, order=-0.1),
        dict(birth_rate=math.nan, death_rate=1, ceiling=10, initial=5),
        dict(birth_rate=math.inf, death_rate=1, ceiling=10, initial=5),
        dict(birth_rate=1, death_rate=1, ceiling=10.5, initial=5),
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ValueError):
        ProcessParams(**kwargs)


_rate_values = st.one_of(
    st.floats(min_value=-10, max_value=10),
    st.just(math.nan),
    st.just(math.inf),
)


@given(
    birth=_rate_values,
    death=_rate_values,
    ceiling=st.integers(min_value=-5, max_value=50),
    initial=st.integers(min_value=-5, max_value=60),
    order=st.one_of(st.floats(min_value=-1, max_value=2), st.just(math.nan)),
)
def test_construction_never_admits_invalid_tuples(birth, death, ceiling, initial, order):
    valid = (
        birth >= 0
        and death >= 0
        and math.isfinite(birth)
        and math.isfinite(death)
        and birth + death > 0
        and ceiling >= 1
        and 1 <= initial <= ceiling
        and 0 < order <= 1
    )
    if valid:
        p = ProcessParams(birth, death, ceiling, initial, order)
        assert p.initial <= p.ceiling
    else:
        with pytest.raises(ValueError):
            ProcessParams(birth, death, ceiling, initial, order)


def test_params_are_frozen():
    p = ProcessParams(1, 1, 10, 5, 0.5)
    with pytest.raises(AttributeError):
        p.birth_rate = 2.0
