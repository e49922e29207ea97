from fractions import Fraction

import pytest

from linefree.bounds import (
    BoundValue,
    induction_step_check,
    main_bound,
    subset_section_bound,
    sziklai_bound,
    theta,
)


def test_theta_values():
    assert theta(4, 2) == 21 and theta(4, 3) == 85
    for q in (2, 3, 7):
        assert theta(q, -1) == 0
        assert theta(q, 0) == 1
        assert theta(q, -2) == Fraction(-1, q)


def test_theta_recurrence():
    for q in range(2, 17):
        for s in range(-3, 11):
            assert theta(q, s) == Fraction(q) ** s + theta(q, s - 1)


def test_bound_value_refuses_to_round():
    assert BoundValue(6, 2).as_int() == 3
    with pytest.raises(ValueError):
        theta(4, -2).as_int()
    with pytest.raises(ValueError):
        theta(1, 2)


def test_sziklai():
    assert sziklai_bound(4, 4) == 13
    assert sziklai_bound(2, 5) == 6
    assert sziklai_bound(1, 9) == 1


def test_main_bound_examples():
    assert main_bound(3, 4, 4) == 51
    assert main_bound(4, 3, 2) == 20
    for q in range(2, 17):
        assert main_bound(3, 2, q) == q * q + 1
        for d in range(2, 17):
            assert main_bound(2, d, q) == sziklai_bound(d, q)


def test_main_bound_monotone_in_d():
    for n in range(2, 7):
        for q in (2, 3, 4, 5):
            values = [main_bound(n, d, q) for d in range(2, 12)]
            assert all(a < b for a, b in zip(values, values[1:]))


def test_subset_section_bound():
    # 13*4 + 1 + floor(13/5)
    assert subset_section_bound(14, 3, 4) == 55
    assert subset_section_bound(1, 2, 2) == 1
    assert subset_section_bound(main_bound(2, 4, 5), 3, 5) == 78 == main_bound(3, 4, 5)


def test_induction_step_examples():
    assert induction_step_check(3, 4, 5)
    assert induction_step_check(4, 3, 4)


def test_induction_grid():
    for n in range(3, 7):
        for q in (2, 3, 4, 5, 7, 8, 9):
            for d in range(2, q + 2):
                assert induction_step_check(n, d, q), (n, d, q)
