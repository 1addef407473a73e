#!/usr/bin/env python3
"""
クイバー側の DT 辞書のテスト
"""

import logging
import time
from fractions import Fraction

import numpy as np
import pytest

from test_utils import TestModuleFactory, run_suite
from src.errors import DimensionError, DomainError, HypothesisError
from src.generator import ANTI_ATTRACTOR, ATTRACTOR, SampleGenerator, enumerate_chambers
from src.lattice import Side, divisibility, iter_dimension_vectors
from src.modules.correspondence import dt_via_seed
from src.modules.presets import preset_names
from src.modules.quiver_dt import (
    KERNEL_CONDITION,
    TRIVIAL_ATTRACTOR_CONDITION,
    QuiverDT,
    assemble_wall_function,
    dt_invariants,
    extract_dt,
    integer_from_rational,
    positivity_audit,
    rational_from_integer,
    simple_wall_function,
)
from src.series import SeriesContext


def test_kronecker1_values():
    """m = 1: Ω_{(1,1)} は反アトラクター側で 1、アトラクター側で 0"""
    quiver = TestModuleFactory.create_quiver(1)
    anti = dt_invariants(quiver, (1, 1), (1, -1), 6)
    assert anti.omega == 1 and anti.omega_bar == 1
    assert anti.chamber_note == ANTI_ATTRACTOR
    assert anti.multiples == {1: 1, 2: 0, 3: 0}
    assert anti.multiples_bar[2] == Fraction(-1, 4)
    attractor = dt_invariants(quiver, (1, 1), (-1, 1), 6)
    assert attractor.omega == 0
    assert attractor.chamber_note == ATTRACTOR


def test_kronecker1_vanishing_up_to_degree_eight():
    """m = 1 の次数8まで、単純表現でない Ω は (1,1) の反アトラクター側の 1 以外すべて 0"""
    quiver = TestModuleFactory.create_quiver(1)
    engine = TestModuleFactory.create_quiver_dt(1)
    checked = 0
    for gamma in iter_dimension_vectors(2, 8):
        if 0 in gamma:
            continue
        for chamber in enumerate_chambers(quiver, gamma, 8):
            record = dt_invariants(quiver, gamma, chamber.theta, 8, engine=engine)
            expected = 1 if gamma == (1, 1) and chamber.note == ANTI_ATTRACTOR else 0
            assert record.omega == expected, (gamma, chamber.note, record.omega)
            checked += 1
    assert checked == 2 * 28


def test_kronecker2_values():
    """m = 2: Ω_{(1,1)} = 2、Ω̄_{(2,2)} = 1/2、Ω_{(2,2)} = 0、実根 (1,2) は 1"""
    engine = TestModuleFactory.create_quiver_dt(2)
    record = engine.dt((1, 1), (1, -1))
    assert record.omega == 2
    assert record.is_integral
    double = engine.dt((2, 2), (1, -1))
    assert double.omega_bar == Fraction(1, 2)
    assert double.omega == 0
    root = engine.dt((1, 2), (2, -1))
    assert root.omega == 1
    assert root.to_dict()["omega"] == "1"


def test_multi_cover_conversion():
    """有理 DT と整数 DT の変換（二次の精密化あり・なし）"""
    gamma0 = (1, 1)
    assert rational_from_integer({1: 2, 2: 0}, gamma0, sign=1) == {1: 2, 2: Fraction(1, 2)}
    assert rational_from_integer({1: 1, 2: 0}, gamma0) == {1: 1, 2: Fraction(-1, 4)}
    # σ = −1 では ((−1)^k)^{j+1}/j² の符号が効く
    assert rational_from_integer({1: 1, 2: 0}, gamma0, sign=-1)[2] == Fraction(-1, 4)
    assert rational_from_integer({1: 1, 2: 0}, gamma0, sign=1)[2] == Fraction(1, 4)
    omega = {1: 3, 2: -1, 3: 2, 4: 5}
    for sign in (None, 1, -1):
        assert integer_from_rational(rational_from_integer(omega, gamma0, sign), gamma0, sign) == omega
    with pytest.raises(DomainError):
        rational_from_integer({1: 1}, (2, 2))


def test_multi_cover_roundtrip_random():
    """乱数で選んだ200組の Ω で有理 DT を経由して元に戻る"""
    rng = np.random.default_rng(2024)
    for _ in range(200):
        gamma0 = (0, 0)
        while divisibility(gamma0) != 1:
            gamma0 = tuple(int(c) for c in rng.integers(0, 5, size=2))
        length = int(rng.integers(1, 9))
        omega = {k: int(rng.integers(-5, 6)) for k in range(1, length + 1)}
        sign = (None, 1, -1)[int(rng.integers(0, 3))]
        bars = rational_from_integer(omega, gamma0, sign)
        assert integer_from_rational(bars, gamma0, sign) == omega, (gamma0, omega, sign)


def test_assemble_and_extract():
    ctx = SeriesContext(Side.QUIVER, 2)
    f = assemble_wall_function({1: 2, 2: Fraction(1, 2)}, (1, 1), ctx, 4)
    assert f.terms == {(0, 0): 1, (1, 1): 2, (2, 2): 3}
    assert extract_dt(f, (1, 1)) == {1: 2, 2: Fraction(1, 2)}


def test_hypothesis_errors():
    """仮定が満たされないときは条件を引用して拒否する"""
    untrusted = TestModuleFactory.create_quiver(1, trivial_attractor=False)
    with pytest.raises(HypothesisError) as info:
        dt_invariants(untrusted, (1, 1), (1, -1), 4)
    assert info.value.condition == TRIVIAL_ATTRACTOR_CONDITION
    balanced = TestModuleFactory.create_triangle_quiver(3, 3, 3)
    with pytest.raises(HypothesisError) as info:
        dt_invariants(balanced, (1, 1, 1), (1, -1, 0), 4)
    assert info.value.condition == KERNEL_CONDITION
    assert KERNEL_CONDITION in str(info.value)


def test_domain_errors():
    quiver = TestModuleFactory.create_quiver(1)
    with pytest.raises(DomainError):
        dt_invariants(quiver, (1, 1), (1, 1), 4)
    with pytest.raises(DomainError):
        dt_invariants(quiver, (2, 2), (1, -1), 3)
    with pytest.raises(DomainError):
        dt_invariants(quiver, (-1, 1), (1, 1), 4)
    with pytest.raises(DimensionError):
        dt_invariants(quiver, (1, 1, 0), (1, -1, 0), 4)
    local_p2 = TestModuleFactory.create_preset("local_p2").quiver
    with pytest.raises(DomainError):
        dt_invariants(local_p2, (1, 0, 0), (0, 1, -1), 4)


def test_enumerate_chambers():
    """階数2では γ^⊥ の2本の半直線がアトラクター側と反アトラクター側"""
    quiver = TestModuleFactory.create_quiver(2)
    chambers = enumerate_chambers(quiver, (1, 1), 4)
    assert sorted(c.note for c in chambers) == [ANTI_ATTRACTOR, ATTRACTOR]
    point = SampleGenerator(7).chamber_point(quiver, (1, 1), ANTI_ATTRACTOR, 4)
    again = SampleGenerator(7).chamber_point(quiver, (1, 1), ANTI_ATTRACTOR, 4)
    assert point == again
    assert point.theta[0] > 0 and point.theta[0] == -point.theta[1]


def test_simple_wall_function():
    quiver = TestModuleFactory.create_quiver(1)
    f = simple_wall_function(quiver, 0, 4)
    assert f.terms == {(0, 0): 1, (1, 0): 1}
    with pytest.raises(DimensionError):
        simple_wall_function(TestModuleFactory.create_preset("local_p2").quiver, 0, 4)


def test_simple_roots_of_every_preset():
    """どのプリセットでも次数8で Ω_{s_i} = 1、Ω_{ks_i} = 0 (2 ≤ k ≤ 8)"""
    for name in preset_names():
        preset = TestModuleFactory.create_preset(name)
        quiver = preset.quiver
        started = time.perf_counter()
        if quiver.vertex_count == 2:
            engine = QuiverDT(quiver)
            for i in range(2):
                simple = quiver.simple(i).coords
                assert simple_wall_function(quiver, i, 8, engine=engine).terms == {(0, 0): 1, simple: 1}
        else:
            engine = TestModuleFactory.shared_hdtv(name)
            for i in range(quiver.vertex_count):
                simple = quiver.simple(i).coords
                for sign in (1, -1):
                    x = tuple(sign * c for c in preset.seed.v_vectors[i])
                    record = dt_via_seed(preset, simple, preset.psi.dual(x), 8, engine=engine)
                    assert record.multiples == {k: (1 if k == 1 else 0) for k in range(1, 9)}, (name, i, sign)
        logging.info(f"{name}: simple roots at order 8 took {time.perf_counter() - started:.1f}s")


def test_positivity_audit():
    """m = 2, 3 の次数6までの Ω はすべて非負整数"""
    engine = TestModuleFactory.create_quiver_dt(2)
    report = engine.audit(4)
    assert report.ok, report.violations
    assert report.checked > 0
    again = positivity_audit(TestModuleFactory.create_quiver(2), 4, sample_size=4, seed=0)
    assert again.to_dict() == report.to_dict()
    for m in (2, 3):
        report = positivity_audit(TestModuleFactory.create_quiver(m), 6)
        assert report.ok, (m, report.violations)
        assert report.checked > 0


def main():
    """メイン実行関数"""
    tests = [
        ("m=1 の DT 不変量", test_kronecker1_values),
        ("m=1 の次数8までの消滅", test_kronecker1_vanishing_up_to_degree_eight),
        ("m=2 の DT 不変量", test_kronecker2_values),
        ("多重被覆の変換", test_multi_cover_conversion),
        ("多重被覆の往復（乱数）", test_multi_cover_roundtrip_random),
        ("壁関数の組み立てと抽出", test_assemble_and_extract),
        ("仮定の違反", test_hypothesis_errors),
        ("定義域の違反", test_domain_errors),
        ("部屋の列挙", test_enumerate_chambers),
        ("単純な壁の関数", test_simple_wall_function),
        ("全プリセットの単純根", test_simple_roots_of_every_preset),
        ("正値性の監査", test_positivity_audit),
    ]
    return run_suite("クイバー側 DT テスト", tests)


if __name__ == "__main__":
    main()
