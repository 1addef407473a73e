#!/usr/bin/env python3
"""
シード側（HDTV）の散乱図式のテスト
"""

import pytest

from test_utils import TestModuleFactory, run_suite
from src.completion import check_consistency
from src.errors import DimensionError, DomainError, HypothesisError, SingularPointError
from src.generator import SampleGenerator
from src.lattice import SymplecticSeed, iter_dimension_vectors
from src.modules.hdtv import (
    SIMPLE_CONDITION,
    curve_class,
    gw_combination,
    initial_hdtv_diagram,
    minimal_cone,
    split_in_out,
)
from src.modules.presets import DET
from src.scattering import Cone, WallTag, chamber_function, is_incoming
from src.series import mul


def test_initial_walls():
    """初期壁は半直線 ℝ_{≥0}v_i 上の 1 + t_i z^{v_i} で、すべて流入壁"""
    seed = TestModuleFactory.create_seed("kronecker1")
    diagram = initial_hdtv_diagram(seed)
    assert [w.label for w in diagram.walls] == ["v1", "v2"]
    first = diagram.walls[0]
    assert first.support == Cone.ray((-1, 0), (0, 1))
    assert first.function.terms == {(0, 0, 0, 0): 1, (0, 1, 1, 0): 1}
    assert all(is_incoming(w, diagram.context) for w in diagram.walls)
    with pytest.raises(DomainError):
        initial_hdtv_diagram(TestModuleFactory.create_degenerate_seed())


def test_local_p2_initial_walls_share_no_ray():
    seed = TestModuleFactory.create_seed("local_p2")
    diagram = initial_hdtv_diagram(seed, 3)
    assert [w.support.rays[0] for w in diagram.walls] == [(-1, 1), (-1, -2), (2, 1)]
    assert diagram.context.t_count == 3


def test_completed_diagram_is_consistent():
    for name, order in (("kronecker1", 6), ("kronecker2", 6), ("kronecker3", 5), ("local_p2", 4)):
        diagram = TestModuleFactory.create_hdtv(name).process(order)
        report = check_consistency(diagram)
        assert report.consistent, str(report)
        assert all(not is_incoming(w, diagram.context) for w in diagram.walls if w.tag is WallTag.ADDED)


def test_split_in_out():
    """f_in は初期壁、f_out は追加壁の積"""
    hdtv = TestModuleFactory.create_hdtv("kronecker1")
    f_in, f_out = hdtv.split((0, 1), 4)
    assert f_in.terms == {(0, 0, 0, 0): 1, (0, 1, 1, 0): 1}
    assert f_out.is_one()
    f_in, f_out = hdtv.split((0, -1), 4)
    assert f_in.is_one()
    assert f_out.terms == {(0, 0, 0, 0): 1, (0, 1, 1, 0): 1}
    f_in, f_out = hdtv.split((1, -1), 4)
    assert f_in.is_one()
    assert f_out.terms == {(0, 0, 0, 0): 1, (-1, 1, 1, 1): 1}


def test_split_multiplies_back_to_chamber_function():
    """乱数で選んだ100個の検証済みの点で f_in · f_out = f_{𝔇,x}"""
    generator = SampleGenerator(11)
    for name, order in (("kronecker2", 5), ("local_p2", 3)):
        diagram = TestModuleFactory.create_hdtv(name).process(order)
        points = generator.points_on_diagram(diagram, 50)
        assert len(set(points)) > 1
        for x in points:
            f_in, f_out = split_in_out(diagram, x)
            assert mul(f_in, f_out) == chamber_function(diagram, x), (name, x)


def test_log_at_and_gw():
    hdtv = TestModuleFactory.create_hdtv("kronecker1")
    first = hdtv.log_at((1, -1), 4, "out")
    assert hdtv.log_at((2, -2), 4, "out") is first
    assert hdtv.gw((1, 1), (1, -1), 4) == 1
    assert gw_combination(hdtv.seed, (1, 1), (-1, 1), 4, engine=hdtv) == 0
    with pytest.raises(SingularPointError):
        hdtv.log_at((0, 0), 4)
    with pytest.raises(DomainError):
        hdtv.log_at((1, -1), 4, "inside")


def test_gw_rejects_simple_multiplicities():
    hdtv = TestModuleFactory.create_hdtv("kronecker2")
    with pytest.raises(HypothesisError) as info:
        hdtv.gw((2, 0), (1, -1), 4)
    assert info.value.condition == SIMPLE_CONDITION
    with pytest.raises(DomainError):
        hdtv.gw((3, 3), (1, -1), 4)


def test_curve_class_local_p2():
    """A = (0,2,1), x = (0,3): β̄·D_{(0,1)} = 3 で、交点数の釣り合いは 0"""
    seed = TestModuleFactory.create_seed("local_p2")
    record = curve_class(seed, (0, 2, 1), (0, 3))
    assert record.cone == ((0, 1),)
    assert record.m_A == (0, 3)
    assert record.intersection_numbers[(0, 1)] == 3
    assert record.intersection_numbers[(-1, -2)] == 2
    assert record.intersection_numbers[(2, 1)] == 1
    assert record.balance == (0, 0)


def test_curve_class_in_two_dimensional_cone():
    seed = TestModuleFactory.create_seed("kronecker1")
    record = curve_class(seed, (1, 1), (1, -1))
    assert record.cone == ((0, -1), (1, 0))
    assert record.b == (1, 1)
    assert set(record.intersection_numbers.values()) == {1}
    assert record.balance == (0, 0)
    assert record.to_dict()["exceptional_multiplicities"] == {"1": 1, "2": 1}


def test_curve_class_balance_vanishes():
    """計算したすべての曲線類で Σ (β̄·D') u_{D'} = 0"""
    generator = SampleGenerator(5)
    records = 0
    for name in ("kronecker1", "kronecker2", "kronecker3", "local_p2"):
        seed = TestModuleFactory.create_seed(name)
        points = generator.points_on_diagram(TestModuleFactory.create_hdtv(name).process(3), 20)
        for A in iter_dimension_vectors(len(seed.e_vectors), 4):
            m = seed.m_of(A)
            candidates = points + ([m, tuple(-c for c in m)] if any(m) else [])
            for x in candidates:
                try:
                    record = curve_class(seed, A, x)
                except DomainError:
                    # m_A が x の半直線に載らない
                    continue
                assert record.balance == (0, 0), (name, A, x)
                records += 1
    assert records > 100


def test_curve_class_errors():
    seed = TestModuleFactory.create_seed("kronecker1")
    with pytest.raises(DomainError):
        curve_class(seed, (0, 0), (1, -1))
    with pytest.raises(DimensionError):
        curve_class(seed, (1, 1, 1), (1, -1))
    with pytest.raises(DomainError):
        minimal_cone(seed, (0, 0))
    coarse = SymplecticSeed(2, ((1, 0), (0, 1)), DET, ((1, 0), (1, 2), (-1, 0), (0, -1)), name="coarse")
    with pytest.raises(DomainError):
        curve_class(coarse, (1, 1), (2, 1))


def test_cache_is_cleared_on_stop():
    hdtv = TestModuleFactory.create_hdtv("kronecker1")
    hdtv.start()
    hdtv.log_at((1, -1), 3)
    assert hdtv.get_info()["cached_order"] == 3
    hdtv.stop()
    assert hdtv.get_info()["cached_order"] is None
    assert not hdtv._logs


def main():
    """メイン実行関数"""
    tests = [
        ("初期壁", test_initial_walls),
        ("局所 P² の初期壁", test_local_p2_initial_walls_share_no_ray),
        ("補完の整合性", test_completed_diagram_is_consistent),
        ("f_in と f_out", test_split_in_out),
        ("f_in · f_out と部屋の関数", test_split_multiplies_back_to_chamber_function),
        ("log と GW の和", test_log_at_and_gw),
        ("単純な重複度の拒否", test_gw_rejects_simple_multiplicities),
        ("局所 P² の曲線類", test_curve_class_local_p2),
        ("2次元錐での曲線類", test_curve_class_in_two_dimensional_cone),
        ("曲線類の釣り合い", test_curve_class_balance_vanishes),
        ("曲線類のエラー", test_curve_class_errors),
        ("停止でキャッシュを空に", test_cache_is_cleared_on_stop),
    ]
    return run_suite("HDTV テスト", tests)


if __name__ == "__main__":
    main()
