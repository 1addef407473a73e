"""
散乱図式の整合性判定と次数ごとの補完

階数2では原点のまわりの一周を評価する。階数3は実験的モードで、関節
（壁の境界の半直線と2枚の壁平面の交わり）ごとに横断平面へ射影した
小さな一周を評価する。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.errors import ConsistencyError, DimensionError, ExperimentalModeError, NonCentralSupportError
from src.lattice import Side, dot, primitive, rot90
from src.scattering import (
    Automorphism,
    Cone,
    DiagramContext,
    ScatteringDiagram,
    Wall,
    WallTag,
    _cross3,
    _det3,
    _sign,
    cross2_is_parallel,
    cross_wall,
    crossing_power,
    format_vector,
    loop_product,
    sort_unique_rays,
    wall_label,
)
from src.series import Exponent, TruncatedSeries, mul

logger = logging.getLogger(__name__)

MAX_SWEEPS = 32


@dataclass
class DefectRecord:
    """最低次の欠陥の1項"""

    exponent: Exponent
    coefficients: Tuple[Fraction, ...]
    joint: Optional[Tuple[int, ...]] = None
    parallel: bool = False

    def to_dict(self, lattice_rank: int) -> Dict[str, object]:
        data = {
            "lattice": list(self.exponent[:lattice_rank]),
            "t": list(self.exponent[lattice_rank:]),
            "coefficients": [str(c) for c in self.coefficients],
        }
        if self.joint is not None:
            data["joint"] = list(self.joint)
            data["parallel"] = self.parallel
        return data


@dataclass
class ConsistencyReport:
    """整合性判定の結果（欠陥がなければ consistent）"""

    subject: str
    order: int
    degree: Optional[int] = None
    defects: List[DefectRecord] = field(default_factory=list)
    lattice_rank: int = 2

    @property
    def consistent(self) -> bool:
        return not self.defects

    def to_dict(self) -> Dict[str, object]:
        return {
            "subject": self.subject,
            "order": self.order,
            "consistent": self.consistent,
            "degree": self.degree,
            "defects": [d.to_dict(self.lattice_rank) for d in self.defects],
        }

    def __str__(self):
        if self.consistent:
            return f"{self.subject}: consistent up to order {self.order}"
        return f"{self.subject}: inconsistent, lowest defect at degree {self.degree} ({len(self.defects)} terms)"


def _require_central(diagram: ScatteringDiagram) -> None:
    for wall in diagram.walls:
        if not wall.support.is_central:
            raise NonCentralSupportError(f"Wall {wall.label} does not pass through the origin")


def check_consistency(diagram: ScatteringDiagram, order: Optional[int] = None) -> ConsistencyReport:
    """
    経路順序積が恒等写像かを調べ、最低次の欠陥を報告する

    Args:
        diagram: 中心的配置の図式
        order: 調べる次数（省略時は図式の次数）
    """
    _require_central(diagram)
    order = diagram.order if order is None else order
    rank = diagram.ambient_rank
    report = ConsistencyReport(diagram.context.name or "diagram", order, lattice_rank=rank)
    if rank == 2:
        degree, defects = loop_product(diagram, order).lowest_defect()
        report.degree = degree
        report.defects = [DefectRecord(e, c) for e, c in sorted(defects.items())]
    elif rank == 3:
        truncated = diagram.truncate(order)
        lowest = None
        records: List[DefectRecord] = []
        for joint in find_joints(truncated.walls):
            auto = local_loop_product(truncated, joint, order)
            degree, defects = auto.lowest_defect()
            if degree is None:
                continue
            if lowest is None or degree < lowest:
                lowest, records = degree, []
            if degree == lowest:
                for e, c in sorted(defects.items()):
                    gamma = primitive(e[:rank])[0]
                    parallel = _is_parallel_joint(diagram.context, gamma, joint)
                    records.append(DefectRecord(e, c, joint, parallel))
        report.degree = lowest
        report.defects = records
    else:
        raise ExperimentalModeError(f"Consistency checks are implemented up to ambient rank 3, got {rank}")
    logger.info(str(report))
    return report


def complete(initial: ScatteringDiagram, order: int, experimental: bool = False) -> ScatteringDiagram:
    """
    次数ごとに壁を加えて整合的な図式にする

    初期壁の関数は多項式として正確に与えられているとみなし、order まで引き上げる。

    Args:
        initial: 初期図式
        order: 目標次数
        experimental: 階数3の関節局所化モードを許可する

    Raises:
        ExperimentalModeError: 階数3で experimental でない、または階数4以上
        ConsistencyError: 欠陥が壁の形に分解できない
    """
    if order < 0:
        raise DimensionError(f"Completion order must be non-negative, got {order}")
    _require_central(initial)
    rank = initial.ambient_rank
    walls = tuple(w.with_function(w.function.with_order(order)) for w in initial.walls)
    diagram = ScatteringDiagram(initial.context, walls, order)
    if rank == 2:
        return _complete_plane(diagram, order)
    if rank == 3:
        if not experimental:
            raise ExperimentalModeError("Completion in ambient rank 3 requires experimental mode")
        if initial.context.side is not Side.QUIVER:
            raise ExperimentalModeError("Experimental completion supports quiver-side diagrams only")
        return _complete_joints(diagram, order)
    raise ExperimentalModeError(f"Completion is not available in ambient rank {rank}")


# --- 階数2 ---


def _wall_geometry(context: DiagramContext, exponent: Exponent) -> Tuple[Tuple[int, ...], Tuple[int, ...], Tuple[int, ...]]:
    """
    欠陥の単項式から (方向, 法線, 流出方向) を決める

    クイバー側の流出方向は −ι_γω_Q、シード側は −m。
    """
    r = context.ambient_rank
    lattice = exponent[:r]
    if all(c == 0 for c in lattice):
        raise ConsistencyError(f"Defect on a monomial with zero lattice part: {exponent}")
    direction = primitive(lattice)[0]
    if context.side is Side.QUIVER:
        point = context.iota(direction)
        if all(c == 0 for c in point):
            raise ConsistencyError(f"Defect in the central direction {format_vector(direction)}")
        return direction, direction, primitive([-c for c in point])[0]
    if context.v_vectors:
        expected = tuple(sum(a * v[k] for a, v in zip(exponent[r:], context.v_vectors)) for k in range(r))
        if expected != lattice:
            raise ConsistencyError(f"Monomial {exponent} violates m = Σ a_i v_i")
    if r == 2:
        normal = primitive(rot90(direction))[0]
    else:
        raise ConsistencyError("Seed-side completion is only defined in rank 2")
    return direction, normal, tuple(-c for c in direction)


def _solve_coefficient(context: DiagramContext, trial: Wall, velocity: Sequence, exponent: Exponent, deltas: Sequence[Fraction]) -> Fraction:
    """壁 1 + c z^d を加えたとき欠陥が消える c"""
    s = crossing_power(context, trial, velocity)
    if context.side is Side.QUIVER:
        row = context.iota(trial.direction)
    else:
        row = trial.support.normal
    ks = [s * row[j] for j in range(context.ambient_rank)]
    pivot = next(j for j, k in enumerate(ks) if k)
    c = -Fraction(deltas[pivot]) / ks[pivot]
    for j, k in enumerate(ks):
        if deltas[j] + k * c != 0:
            raise ConsistencyError(f"Defect at {exponent} is not of wall type: generator {j} leaves {deltas[j] + k * c}")
    return c


def _merge_added(
    diagram: ScatteringDiagram, additions: Dict[tuple, Tuple[Cone, tuple, Dict[Exponent, Fraction]]], order: int
) -> ScatteringDiagram:
    """追加分を、同じ台と方向の追加壁にかけ合わせる（なければ新しい壁）"""
    ctx = diagram.context.series_context
    walls = list(diagram.walls)
    for key, (support, direction, terms) in additions.items():
        terms = dict(terms)
        terms[ctx.zero()] = Fraction(1)
        f = TruncatedSeries(ctx, order, terms)
        for i, wall in enumerate(walls):
            if wall.tag is WallTag.ADDED and wall.support == support and wall.direction == direction:
                walls[i] = wall.with_function(mul(wall.function, f))
                break
        else:
            walls.append(Wall(support, direction, f, WallTag.ADDED, wall_label(WallTag.ADDED, direction, support)))
    return diagram.with_walls(walls)


def _complete_plane(diagram: ScatteringDiagram, order: int) -> ScatteringDiagram:
    context = diagram.context
    for degree in range(1, order + 1):
        auto = loop_product(diagram, degree)
        low, defects = auto.lowest_defect()
        if low is None:
            logger.debug(f"{context.name}: degree {degree} consistent, {len(diagram.walls)} walls")
            continue
        if low < degree:
            raise ConsistencyError(f"Defect at degree {low} survived while completing degree {degree}")
        additions: Dict[tuple, Tuple[Cone, tuple, Dict[Exponent, Fraction]]] = {}
        for exponent, deltas in sorted(defects.items()):
            direction, normal, out = _wall_geometry(context, exponent)
            support = Cone.ray(normal, out)
            trial = Wall(support, direction, TruncatedSeries.one(context.series_context, degree), WallTag.ADDED)
            c = _solve_coefficient(context, trial, rot90(out), exponent, deltas)
            key = (support, direction)
            additions.setdefault(key, (support, direction, {}))[2][exponent] = c
        diagram = _merge_added(diagram, additions, order)
        logger.info(f"{context.name}: degree {degree} added {len(additions)} walls")
        logger.debug(f"{context.name}: {len(diagram.walls)} walls after degree {degree}")
    return diagram


# --- 階数3（実験的） ---


def find_joints(walls: Sequence[Wall]) -> List[Tuple[int, ...]]:
    """
    関節: 壁の境界の半直線と、2枚の壁平面の交線のうち両方の台に入る半直線
    """
    joints: List[Tuple[int, ...]] = []

    def add(ray):
        ray = primitive(ray)[0]
        if ray not in joints:
            joints.append(ray)

    for wall in walls:
        for ray in wall.support.rays:
            add(ray)
    for i, a in enumerate(walls):
        for b in walls[i + 1 :]:
            line = _cross3(a.support.normal, b.support.normal)
            if not any(line):
                continue
            for ray in (line, tuple(-c for c in line)):
                if a.support.contains(ray) and b.support.contains(ray):
                    add(ray)
    return sorted(joints)


def _quotient_basis(joint: Sequence[int]) -> Tuple[tuple, tuple, int]:
    units = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    for i in range(3):
        for k in range(i + 1, 3):
            det = _det3(joint, units[i], units[k])
            if det:
                return units[i], units[k], _sign(det)
    raise ConsistencyError(f"Joint {tuple(joint)} is zero")


def _project(joint, b1, b2, sign, x) -> Tuple[int, int]:
    return (_det3(joint, x, b2) * sign, _det3(joint, b1, x) * sign)


def _local_image(wall: Wall, joint: Sequence[int], b1, b2, sign) -> List[Tuple[int, int]]:
    """関節のまわりの横断平面での壁の像（直線なら2本の半直線）"""
    cone = wall.support
    interior = cone.full or all(dot(h, joint) > 0 for h in cone.halfspaces)
    if interior:
        u = primitive(_project(joint, b1, b2, sign, _cross3(cone.normal, joint)))[0]
        return [u, (-u[0], -u[1])]
    others = [r for r in cone.rays if not cross2_is_parallel(r, joint)]
    return [primitive(_project(joint, b1, b2, sign, others[0]))[0]]


def _lift(b1, b2, vec2) -> tuple:
    return tuple(vec2[0] * a + vec2[1] * b for a, b in zip(b1, b2))


def local_loop_product(diagram: ScatteringDiagram, joint: Sequence[int], order: int) -> Automorphism:
    """関節のまわりの小さな一周の経路順序積"""
    b1, b2, sign = _quotient_basis(joint)
    items = []
    for wall in diagram.walls:
        if not wall.support.contains(joint):
            continue
        for u in _local_image(wall, joint, b1, b2, sign):
            items.append((u, wall))
    auto = Automorphism.identity(diagram.context, order)
    caches: Dict[int, Dict[int, TruncatedSeries]] = {}
    for u, wall in _sort_local(items):
        velocity = _lift(b1, b2, rot90(u))
        auto = cross_wall(auto, wall, crossing_power(diagram.context, wall, velocity), caches)
    return auto


def _sort_local(items):
    # u はすべて原始ベクトルなので半直線と一対一
    position = {u: i for i, u in enumerate(sort_unique_rays(u for u, _ in items))}
    return sorted(items, key=lambda item: (position[item[0]],) + item[1].sort_key())


def _is_parallel_joint(context: DiagramContext, gamma: Sequence[int], joint: Sequence[int]) -> bool:
    point = context.iota(gamma)
    return cross2_is_parallel(point, joint)


def _complete_joints(diagram: ScatteringDiagram, order: int) -> ScatteringDiagram:
    context = diagram.context
    for degree in range(1, order + 1):
        for sweep in range(MAX_SWEEPS):
            current = diagram.truncate(degree)
            additions: Dict[tuple, Tuple[Cone, tuple, Dict[Exponent, Fraction]]] = {}
            for joint in find_joints(current.walls):
                low, defects = local_loop_product(current, joint, degree).lowest_defect()
                if low is None or low != degree:
                    continue
                b1, b2, sign = _quotient_basis(joint)
                for exponent, deltas in sorted(defects.items()):
                    direction, normal, out = _wall_geometry(context, exponent)
                    if dot(direction, joint) != 0:
                        raise ConsistencyError(f"Defect {exponent} at joint {joint} is not supported through the joint")
                    if cross2_is_parallel(out, joint):
                        logger.warning(f"{context.name}: defect {exponent} at parallel joint {format_vector(joint)} left as is")
                        continue
                    support = Cone.span(normal, joint, out)
                    trial = Wall(support, direction, TruncatedSeries.one(context.series_context, degree), WallTag.ADDED)
                    u = primitive(_project(joint, b1, b2, sign, out))[0]
                    c = _solve_coefficient(context, trial, _lift(b1, b2, rot90(u)), exponent, deltas)
                    additions.setdefault((support, direction), (support, direction, {}))[2][exponent] = c
            if not additions:
                break
            diagram = _merge_added(diagram, additions, order)
            logger.info(f"{context.name}: degree {degree} sweep {sweep + 1} added {len(additions)} walls")
        else:
            raise ConsistencyError(f"Joint sweeps did not settle at degree {degree}")
    return diagram
