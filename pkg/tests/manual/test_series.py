#!/usr/bin/env python3
"""
打ち切り形式冪級数のテスト
"""

from fractions import Fraction

import pytest

from test_utils import run_suite
from src.errors import DimensionError, DomainError, SeriesContextError
from src.lattice import Side
from src.series import (
    SeriesContext,
    TruncatedSeries,
    coefficients_along,
    exp,
    int_pow,
    inverse,
    log,
    mul,
    series_from_coefficients,
)

QUIVER2 = SeriesContext(Side.QUIVER, 2)
SEED2 = SeriesContext(Side.SEED, 2, 2)


def _one_plus(context, exponent, order, coeff=1):
    return TruncatedSeries(context, order, {context.zero(): 1, tuple(exponent): coeff})


def test_multiplication_truncates():
    """積は打ち切り次数より上の項を落とす"""
    f = _one_plus(QUIVER2, (1, 0), 3)
    g = _one_plus(QUIVER2, (0, 1), 3)
    product = mul(f, g)
    assert product.terms == {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}
    cube = int_pow(_one_plus(QUIVER2, (1, 1), 3), 3)
    assert cube.terms == {(0, 0): 1, (1, 1): 3}


def test_inverse_and_negative_powers():
    f = _one_plus(QUIVER2, (1, 0), 4)
    inv = inverse(f)
    assert inv.terms == {(0, 0): 1, (1, 0): -1, (2, 0): 1, (3, 0): -1, (4, 0): 1}
    assert mul(f, inv).is_one()
    assert int_pow(f, -2) == mul(inv, inv)
    with pytest.raises(DomainError):
        inverse(TruncatedSeries(QUIVER2, 3, {(0, 0): 2}))


def test_log_and_exp():
    """log(1 + z) の係数と exp∘log = id"""
    f = _one_plus(QUIVER2, (0, 1), 4)
    g = log(f)
    assert g.terms == {(0, 1): 1, (0, 2): Fraction(-1, 2), (0, 3): Fraction(1, 3), (0, 4): Fraction(-1, 4)}
    assert exp(g) == f
    with pytest.raises(DomainError):
        log(TruncatedSeries(QUIVER2, 3, {(1, 0): 1}))
    with pytest.raises(DomainError):
        exp(f)


def test_seed_side_degree_counts_t_only():
    """シード側の次数は t の指数だけで数え、格子の指数は負でもよい"""
    e = SEED2.make((-3, 5), (1, 1))
    assert SEED2.degree(e) == 2
    f = TruncatedSeries(SEED2, 1, {SEED2.zero(): 1, e: 1, SEED2.make((1, 0), (1, 0)): 1})
    assert e not in f.terms
    with pytest.raises(DomainError):
        TruncatedSeries(SEED2, 2, {SEED2.make((0, 0), (-1, 0)): 1})


def test_quiver_side_rejects_negative_exponents():
    with pytest.raises(DomainError):
        TruncatedSeries(QUIVER2, 2, {(-1, 0): 1})
    with pytest.raises(DimensionError):
        QUIVER2.make((1, 0, 0))


def test_context_mismatch():
    f = _one_plus(QUIVER2, (1, 0), 2)
    g = TruncatedSeries(SeriesContext(Side.QUIVER, 3), 2, {(0, 0, 0): 1})
    with pytest.raises(SeriesContextError):
        mul(f, g)


def test_coefficients_along():
    """z^{kγ0} の係数だけを取り出す"""
    f = series_from_coefficients(QUIVER2, 9, (1, 2), {1: 2, 2: Fraction(1, 2), 3: -1})
    assert coefficients_along(f, (1, 2)) == {1: 2, 2: Fraction(1, 2), 3: -1}
    with pytest.raises(DomainError):
        coefficients_along(mul(f, _one_plus(QUIVER2, (1, 0), 9)), (1, 2))


def test_json_form():
    f = TruncatedSeries(SEED2, 2, {SEED2.zero(): 1, SEED2.make((0, 1), (1, 0)): Fraction(2, 3)})
    data = f.to_json()
    assert data["order"] == 2
    assert [[0, 1], [1, 0], 2, 3] in data["terms"]
    assert TruncatedSeries.from_json(data) == f


def main():
    """メイン実行関数"""
    tests = [
        ("積の打ち切り", test_multiplication_truncates),
        ("逆元と負の冪", test_inverse_and_negative_powers),
        ("log と exp", test_log_and_exp),
        ("シード側の次数", test_seed_side_degree_counts_t_only),
        ("クイバー側の負の指数", test_quiver_side_rejects_negative_exponents),
        ("文脈の不一致", test_context_mismatch),
        ("倍数方向の係数", test_coefficients_along),
        ("JSON 形式", test_json_form),
    ]
    return run_suite("級数テスト", tests)


if __name__ == "__main__":
    main()
