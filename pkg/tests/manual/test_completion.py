#!/usr/bin/env python3
"""
補完と整合性判定のテスト

階数2の結果は tests/manual/oracles.py の独立した実装と照合する。
"""

from fractions import Fraction

import pytest

import oracles
from test_utils import TestModuleFactory, run_suite
from src.completion import check_consistency, complete
from src.errors import ConsistencyError, DimensionError, ExperimentalModeError
from src.modules.hdtv import initial_hdtv_diagram
from src.modules.quiver_dt import QuiverDT, initial_cluster_diagram
from src.scattering import Cone, WallTag, chamber_function, equivalent, sort_unique_rays

# (m, 次数)
ORACLE_CASES = [(1, 8), (2, 6), (3, 6)]


def _as_oracle_walls(diagram):
    """src の壁を (半直線, γ, 関数の辞書) に直す"""
    walls = []
    for wall in diagram.walls:
        for u in wall.support.line_directions():
            walls.append((u, wall.direction, dict(wall.function.terms)))
    return walls


def test_kronecker1_pentagon():
    """m = 1 では次数8でも (1,−1) 方向に 1 + z^{(1,1)} の壁が1枚だけ加わる"""
    diagram = TestModuleFactory.create_quiver_dt(1).process(8)
    assert len(diagram.walls) == 3
    (added,) = diagram.added_walls()
    assert added.direction == (1, 1)
    assert added.support == Cone.ray((1, 1), (1, -1))
    assert added.function.terms == {(0, 0): 1, (1, 1): 1}
    assert added.tag is WallTag.ADDED
    assert check_consistency(diagram).consistent


def test_kronecker2_central_ray():
    """m = 2 の中心の半直線の関数は (1 − z^{(1,1)})^{-2}"""
    diagram = TestModuleFactory.create_quiver_dt(2).process(6)
    f = chamber_function(diagram, (1, -1))
    assert f.terms == {(k, k): k + 1 for k in range(4)}
    assert check_consistency(diagram).consistent


def test_completions_are_consistent():
    for m, order in ORACLE_CASES:
        diagram = TestModuleFactory.create_quiver_dt(m).process(order)
        report = check_consistency(diagram)
        assert report.consistent, str(report)
        assert report.degree is None


def test_chamber_functions_match_oracle():
    """全ての半直線で部屋関数が独立実装の補完と一致する"""
    for m, order in ORACLE_CASES:
        skew = oracles.kronecker_skew(m)
        expected_walls = oracles.complete_walls(skew, order)
        diagram = TestModuleFactory.create_quiver_dt(m).process(order)
        src_rays = [u for w in diagram.walls for u in w.support.line_directions()]
        rays = sort_unique_rays(src_rays + oracles.wall_rays(expected_walls))
        for u in rays:
            expected = oracles.chamber_product(expected_walls, u, order)
            assert chamber_function(diagram, u).terms == expected, f"m={m}, ray {u}"


def test_brute_force_loop_is_identity():
    """src の補完を独立な合成器で一周させても欠陥が残らない"""
    for m, order in ORACLE_CASES:
        skew = oracles.kronecker_skew(m)
        diagram = TestModuleFactory.create_quiver_dt(m).process(order)
        assert oracles.loop_defect(_as_oracle_walls(diagram), skew, order) == {}
    defects = oracles.loop_defect(oracles.initial_walls(oracles.kronecker_skew(1)), oracles.kronecker_skew(1), 3)
    assert (1, 1) in defects


def test_order_zero_and_negative():
    initial = initial_cluster_diagram(TestModuleFactory.create_quiver(2))
    assert all(w.function.is_one() for w in complete(initial, 0).walls)
    truncated = complete(initial, 1)
    assert len(truncated.walls) == 2 and not truncated.added_walls()
    with pytest.raises(DimensionError):
        complete(initial, -1)


def test_cache_truncates_lower_orders():
    """キャッシュより低い次数は切り詰めて返す"""
    engine = TestModuleFactory.create_quiver_dt(2)
    high = engine.process(6)
    low = engine.process(3)
    assert low.order == 3
    assert engine.cached_order() == 6
    assert chamber_function(low, (1, -1)).terms == {(0, 0): 1, (1, 1): 2}
    assert chamber_function(high, (1, -1)).agrees_with(chamber_function(low, (1, -1)))
    engine.start()
    assert engine.cached_order() is None
    engine.process(3)
    assert engine.cached_order() == 3
    engine.stop()
    assert engine.cached_order() is None


def test_completion_is_idempotent():
    """補完済みの図式をもう一度補完しても何も加わらない"""
    diagrams = [initial_cluster_diagram(TestModuleFactory.create_quiver(m)) for m in (1, 2, 3)]
    diagrams.append(initial_hdtv_diagram(TestModuleFactory.create_preset("kronecker2").seed))
    diagrams.append(initial_hdtv_diagram(TestModuleFactory.create_preset("local_p2").seed))
    for initial, order in zip(diagrams, (6, 5, 5, 4, 3)):
        once = complete(initial, order)
        twice = complete(once, order)
        assert equivalent(twice, once), initial.context.name
        assert len(twice.walls) == len(once.walls)


def test_completion_is_monotone_in_order():
    """次数6の補完を次数3に切り詰めると次数3の補完と同値"""
    for m in (2, 3):
        initial = initial_cluster_diagram(TestModuleFactory.create_quiver(m))
        high = complete(initial, 6)
        low = complete(initial, 3)
        assert high.truncate(3).order == 3
        assert equivalent(high.truncate(3), low), f"m={m}"


def test_rank_three_requires_experimental_mode():
    """3頂点は実験的モードでのみ補完し、それでも失敗しうる"""
    quiver = TestModuleFactory.create_preset("local_p2").quiver
    engine = QuiverDT(quiver)
    with pytest.raises(ExperimentalModeError):
        engine.process(2)
    engine.set_parameter("experimental", True)
    try:
        diagram = engine.process(2)
    except ConsistencyError:
        return
    assert diagram.order == 2
    assert len(diagram.initial_walls()) == 3


def test_rank_six_is_refused():
    engine = QuiverDT(TestModuleFactory.create_preset("cubic").quiver)
    engine.set_parameter("experimental", True)
    with pytest.raises(ExperimentalModeError):
        engine.process(2)


def test_oracle_pentagon_by_hand():
    """独立実装どうしの確認: 5角形の恒等式"""
    skew = oracles.kronecker_skew(1)
    walls = oracles.initial_walls(skew) + [((1, -1), (1, 1), {(0, 0): Fraction(1), (1, 1): Fraction(1)})]
    assert oracles.loop_defect(walls, skew, 8) == {}


def main():
    """メイン実行関数"""
    tests = [
        ("5角形の恒等式", test_kronecker1_pentagon),
        ("m=2 の中心の半直線", test_kronecker2_central_ray),
        ("補完の整合性", test_completions_are_consistent),
        ("オラクルとの照合", test_chamber_functions_match_oracle),
        ("独立な一周の合成", test_brute_force_loop_is_identity),
        ("次数0と負の次数", test_order_zero_and_negative),
        ("キャッシュの切り詰め", test_cache_truncates_lower_orders),
        ("補完の冪等性", test_completion_is_idempotent),
        ("次数についての単調性", test_completion_is_monotone_in_order),
        ("階数3の実験的モード", test_rank_three_requires_experimental_mode),
        ("階数6の拒否", test_rank_six_is_refused),
        ("手計算の5角形", test_oracle_pentagon_by_hand),
    ]
    return run_suite("補完テスト", tests)


if __name__ == "__main__":
    main()
