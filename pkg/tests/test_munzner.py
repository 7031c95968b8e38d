import pytest
from hypothesis import given
from hypothesis import strategies as st

from isoparam.errors import DomainError, InconsistentFocalData, UnclassifiedError
from isoparam.munzner import (
    INTEGERS,
    MOD2,
    S4_CASES,
    FocalData,
    classify_s4_case,
    munzner_cohomology,
    scan,
)


def test_focal_data_validation():
    with pytest.raises(DomainError):
        FocalData(3, 1, 2)
    with pytest.raises(DomainError):
        FocalData(3, 4, 1)
    d = FocalData(3, 2, 1, True)
    assert d.mu == 3 and d.ring == INTEGERS
    assert FocalData(3, 1, 1).ring == MOD2


def test_case_one_one_nonorientable():
    t = munzner_cohomology(FocalData(3, 1, 1, False))
    assert t.ring == MOD2 and t.alpha == 3
    assert t.plus == [1, 1, 1, 0] and t.minus == [1, 1, 1, 0]
    assert t.hypersurface == [1, 2, 2, 1]
    assert classify_s4_case(t).focal_plus == "RP^2"


def test_case_two_one_orientable():
    t = munzner_cohomology(FocalData(3, 2, 1, True))
    assert t.plus == [1, 1, 0, 0] and t.minus == [1, 0, 1, 0]
    assert t.hypersurface == [1, 1, 1, 1]
    c = classify_s4_case(t)
    assert (c.focal_plus, c.focal_minus, c.hypersurface) == ("S^1", "S^2", "S^1 x S^2")


def test_case_three_three():
    t = munzner_cohomology(FocalData(3, 3, 3, True))
    assert t.alpha == 1
    assert t.plus == [1, 0, 0, 0] and t.minus == [1, 0, 0, 0]
    assert classify_s4_case(t).label == "(pt, pt) / S^3"


def test_inconsistent_data():
    with pytest.raises(InconsistentFocalData):
        munzner_cohomology(FocalData(3, 2, 2))


def test_unclassified():
    t = munzner_cohomology(FocalData(3, 1, 1, True))
    with pytest.raises(UnclassifiedError):
        classify_s4_case(t)
    with pytest.raises(UnclassifiedError):
        classify_s4_case(munzner_cohomology(FocalData(4, 2, 2)))


def test_n3_accepted_pairs():
    accepted = {(e.data.m1, e.data.m_1) for e in scan(3) if e.data.n == 3 and not e.rejected}
    assert accepted == {(1, 1), (2, 1), (3, 3)}
    labels = {classify_s4_case(munzner_cohomology(FocalData(3, m1, m_1, (m1, m_1) != (1, 1)))).label for m1, m_1 in accepted}
    assert labels == {c.label for c in S4_CASES.values()}


def test_exhaustive_scan_invariants():
    entries = scan(8)
    for e in entries:
        if e.rejected:
            assert (2 * e.data.n) % e.data.mu != 0
            continue
        t = e.table
        assert t.alpha * e.data.mu == 2 * e.data.n
        assert t.h0_is_ring()
        assert t.ring == e.data.ring
        assert not any("both congruences" in f for f in t.flags)


def test_scan_symmetry():
    # the hypersurface table is symmetric for every accepted input except (6, 3, 1),
    # whose focal ranks exceed the focal dimension and which is flagged unrealizable
    bad = set()
    for e in scan(8):
        if e.rejected:
            continue
        if not e.table.poincare_symmetric():
            bad.add((e.data.n, e.data.m1, e.data.m_1))
            assert not e.table.within_dimension() and e.table.flags
        else:
            assert e.table.within_dimension()
    assert bad == {(6, 3, 1)}


@given(st.integers(1, 30), st.integers(1, 30), st.integers(1, 30), st.booleans())
def test_ranks_are_zero_or_one(n, m1, m_1, o):
    if not 1 <= m_1 <= m1 <= n:
        return
    try:
        t = munzner_cohomology(FocalData(n, m1, m_1, o))
    except InconsistentFocalData:
        assert (2 * n) % (m1 + m_1)
        return
    assert set(t.plus) <= {0, 1} and set(t.minus) <= {0, 1}
    assert t.plus[n] == 0 and t.minus[n] == 0
    assert sum(t.hypersurface) == 2 + sum(t.plus[1:n]) + sum(t.minus[1:n])


def test_to_dict():
    d = munzner_cohomology(FocalData(3, 1, 1)).to_dict()
    assert d["M"] == [1, 2, 2, 1] and d["ring"] == MOD2 and d["alpha"] == 3
