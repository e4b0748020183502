import pytest

from mppilp.plan import Plan


def test_arrival_is_stabilisation_time():
    # robot passes its goal at t=1 and comes back at t=3
    p = Plan(((0, 1, 2, 1),))
    assert p.arrival_times() == [3]
    assert p.lengths() == [3]
    assert Plan(((0, 1, 1, 1),)).arrival_times() == [1]


def test_trim_pad_concat():
    p = Plan(((0, 1, 1), (2, 2, 2)))
    assert p.trimmed() == Plan(((0, 1), (2, 2)))
    assert p.trimmed().padded(2) == p
    q = Plan(((1, 0), (2, 1)))
    assert p.concat(q).paths == ((0, 1, 1, 0), (2, 2, 2, 1))
    with pytest.raises(ValueError):
        q.concat(p)


def test_shape_checks():
    with pytest.raises(ValueError):
        Plan(((0, 1), (1,)))
    with pytest.raises(ValueError):
        Plan(((0, 1),)).padded(0)


def test_from_configs():
    p = Plan.from_configs([(0, 1), (1, 2)])
    assert p.paths == ((0, 1), (1, 2))
    assert p.at(1) == (1, 2)
