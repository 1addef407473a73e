import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from src.errors import DimensionError, DomainError, HypothesisError, SingularPointError
from src.lattice import Side, SymplecticSeed, cross2, primitive_rational, rot90, same_ray, validate_seed
from src.scattering import (
    Cone,
    DiagramContext,
    ScatteringDiagram,
    Wall,
    WallTag,
    chamber_function,
    format_vector,
    singular_walls,
)
from src.series import TruncatedSeries, log, mul
from .base_module import BaseModule

logger = logging.getLogger(__name__)

SIMPLE_CONDITION = "γ ∉ ℤ_{≥1}s_i"


class HDTV(BaseModule):
    """
    シード側の散乱図式
    初期 HDTV 図式を補完し、f_in / f_out の分解と曲線類の注釈を与えます。

    2次元では部屋関数は x の半直線だけで決まるので、log は半直線ごとに保持する。
    """

    PARTS = ("chamber", "in", "out")

    def __init__(self, seed: SymplecticSeed, name: Optional[str] = None):
        self.seed = seed
        self._logs: Dict[tuple, TruncatedSeries] = {}
        super().__init__(name or f"HDTV[{seed.name}]")

    def initial_diagram(self) -> ScatteringDiagram:
        return initial_hdtv_diagram(self.seed)

    def _reset(self):
        super()._reset()
        with self._lock:
            self._logs.clear()

    def split(self, x: Sequence, order: Optional[int] = None) -> Tuple[TruncatedSeries, TruncatedSeries]:
        return split_in_out(self.process(order), x)

    def log_at(self, x: Sequence, order: int, part: str = "chamber") -> TruncatedSeries:
        """
        x を通る壁の積の log

        Args:
            x: 一般の点
            order: 次数
            part: "chamber"（全体）、"in"（初期壁）、"out"（追加壁）
        """
        if part not in self.PARTS:
            raise DomainError(f"Unknown part {part!r}; choose one of {', '.join(self.PARTS)}")
        if all(Fraction(c) == 0 for c in x):
            raise SingularPointError("The origin lies in Sing(D)")
        key = (order, part, primitive_rational(x))
        with self._lock:
            cached = self._logs.get(key)
        if cached is not None:
            return cached
        diagram = self.process(order)
        if part == "chamber":
            f = chamber_function(diagram, x)
        else:
            f_in, f_out = split_in_out(diagram, x)
            f = f_in if part == "in" else f_out
        value = log(f)
        with self._lock:
            self._logs[key] = value
        return value

    def gw(self, A: Sequence[int], x: Sequence, order: Optional[int] = None) -> Fraction:
        return gw_combination(self.seed, A, x, order or self.get_parameter("order"), engine=self)


def seed_context(seed: SymplecticSeed) -> DiagramContext:
    return DiagramContext(Side.SEED, seed.rank, len(seed.e_vectors), seed.omega, seed.v_vectors, seed.name)


def initial_hdtv_diagram(seed: SymplecticSeed, order: int = 1) -> ScatteringDiagram:
    """
    初期 HDTV 図式 {(ℝ_{≥0}v_i, 1 + t_i z^{v_i}) : i ∈ I}

    一般形では壁は ρ − ℝ_{≥0}v_i 型の錐で、ρ は M_ℝ/ℝv_i の扇の余次元1の錐を走る。
    階数2では M_ℝ/ℝv_i ≅ ℝ の余次元1の錐は {0} だけなので、壁は半直線 ℝ_{≥0}v_i
    ただ1本になる。台が一致しても添字 i が違う壁は別の壁として残す。

    Raises:
        DomainError: シードが不正
    """
    report = validate_seed(seed)
    if not report.ok:
        raise DomainError(f"Invalid seed {seed.name}: {'; '.join(report.errors)}")
    if seed.rank != 2:
        raise DimensionError(f"Initial HDTV diagrams are built in rank 2, got rank {seed.rank}")
    context = seed_context(seed)
    series_ctx = context.series_context
    walls = []
    for i, v in enumerate(seed.v_vectors):
        t_part = tuple(1 if k == i else 0 for k in range(len(seed.v_vectors)))
        f = TruncatedSeries(series_ctx, order, {series_ctx.zero(): 1, series_ctx.make(v, t_part): 1})
        support = Cone.ray(rot90(v), v)
        walls.append(Wall(support, v, f, WallTag.INITIAL, f"v{i + 1}", i))
    return ScatteringDiagram(context, tuple(walls), order)


def split_in_out(diagram: ScatteringDiagram, x: Sequence) -> Tuple[TruncatedSeries, TruncatedSeries]:
    """
    f_in（x を通る初期壁の積）と f_out（x を通る追加壁の積）

    Raises:
        SingularPointError: x ∈ Sing(𝔇)
    """
    point = tuple(Fraction(c) for c in x)
    offending = singular_walls(diagram, point)
    if offending:
        raise SingularPointError(f"Point {format_vector(point)} lies in Sing(D)", offending)
    f_in = TruncatedSeries.one(diagram.context.series_context, diagram.order)
    f_out = f_in
    for wall in diagram.walls:
        if not wall.support.contains(point):
            continue
        f = wall.function.truncate(diagram.order)
        if wall.tag is WallTag.INITIAL:
            f_in = mul(f_in, f)
        else:
            f_out = mul(f_out, f)
    return f_in, f_out


# --- 曲線類 ---


@dataclass
class CurveClassRecord:
    """
    曲線類 β_A^x = β̄_A^x − Σ a_i [E_i]

    intersection_numbers は扇の半直線 D' ごとの β̄·D'、exceptional_multiplicities は a_i。
    """

    intersection_numbers: Dict[Tuple[int, ...], int]
    exceptional_multiplicities: Dict[int, int]
    point: Tuple[Fraction, ...] = ()
    cone: Tuple[Tuple[int, ...], ...] = ()
    m_A: Tuple[int, ...] = ()
    b: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def balance(self) -> Tuple[int, ...]:
        """Σ (β̄·D') u_{D'}（有理同値で 0 になる）"""
        total = [0, 0]
        for ray, value in self.intersection_numbers.items():
            total[0] += value * ray[0]
            total[1] += value * ray[1]
        return tuple(total)

    def to_dict(self) -> Dict[str, object]:
        return {
            "point": [str(c) for c in self.point],
            "sigma_x": [list(r) for r in self.cone],
            "m_A": list(self.m_A),
            "b": list(self.b),
            "intersection_numbers": [{"ray": list(r), "value": v} for r, v in sorted(self.intersection_numbers.items())],
            "exceptional_multiplicities": {str(i + 1): a for i, a in sorted(self.exceptional_multiplicities.items())},
            "balance": list(self.balance),
        }


def minimal_cone(seed: SymplecticSeed, x: Sequence) -> Tuple[Tuple[int, ...], ...]:
    """x を含む扇の最小の錐（半直線なら1本、2次元錐なら2本）"""
    rays = seed.fan_rays
    if not rays:
        raise DomainError(f"Seed {seed.name} has no fan")
    if all(c == 0 for c in x):
        raise DomainError("The origin has no minimal cone of dimension ≥ 1")
    for u in rays:
        if same_ray(u, x):
            return (u,)
    for k, u in enumerate(rays):
        w = rays[(k + 1) % len(rays)]
        if cross2(u, x) > 0 and cross2(x, w) > 0 and cross2(u, w) > 0:
            return (u, w)
    raise DomainError(f"Point {format_vector(x)} is not covered by the fan of {seed.name}")


def curve_class(seed: SymplecticSeed, A: Sequence[int], x: Sequence) -> CurveClassRecord:
    """
    β̄_A^x · D' = Σ_{i ∈ I_{D'}} a_i + Σ_{j ∈ J_{D'}} b_j

    m_A = −Σ a_i v_i を σ_x の原始生成元で m_A = Σ b_j m_j と書く。

    Raises:
        DomainError: A = 0、σ_x が非ユニモジュラー、または m_A が σ_x の張る空間にない
    """
    A = tuple(int(a) for a in A)
    if len(A) != len(seed.e_vectors):
        raise DimensionError(f"Multiplicity vector {A} has length {len(A)}, expected {len(seed.e_vectors)}")
    if not any(A):
        raise DomainError("curve_class needs a nonzero multiplicity vector")
    point = tuple(Fraction(c) for c in x)
    m_A = tuple(-c for c in seed.m_of(A))
    cone = minimal_cone(seed, point)
    if len(cone) == 1:
        (u,) = cone
        if cross2(u, m_A) != 0:
            raise DomainError(f"m_A = {format_vector(m_A)} is not in the span of σ_x = {format_vector(u)}")
        k = next(i for i, c in enumerate(u) if c)
        b = (m_A[k] // u[k],)
    else:
        u, w = cone
        det = cross2(u, w)
        if abs(det) != 1:
            raise DomainError(f"σ_x spanned by {format_vector(u)}, {format_vector(w)} is not unimodular (det {det})")
        b = (cross2(m_A, w) * det, cross2(u, m_A) * det)
    numbers: Dict[Tuple[int, ...], int] = {}
    for ray in seed.fan_rays:
        value = sum(a for a, v in zip(A, seed.v_vectors) if same_ray(v, ray))
        value += sum(bj for bj, uj in zip(b, cone) if uj == ray)
        numbers[ray] = value
    record = CurveClassRecord(numbers, {i: a for i, a in enumerate(A)}, point, cone, m_A, b)
    if any(record.balance):
        logger.warning(f"Curve class at {format_vector(point)} has nonzero balance {record.balance}")
    return record


# --- 寄与の総和 ---


def _check_not_simple(A: Sequence[int]) -> None:
    support = [a for a in A if a]
    if len(support) <= 1:
        raise HypothesisError(f"Multiplicity vector {tuple(A)} is a multiple of a single s_i", SIMPLE_CONDITION)


def log_coefficient(f: TruncatedSeries, seed: SymplecticSeed, A: Sequence[int]) -> Fraction:
    """f の z^{Σ a_i v_i} ∏ t_i^{a_i} の係数"""
    exponent = f.context.make(seed.m_of(A), A)
    return f.terms.get(exponent, Fraction(0))


def gw_combination(
    seed: SymplecticSeed, A: Sequence[int], x: Sequence, order: int, engine: Optional[HDTV] = None
) -> Fraction:
    """
    Σ_τ k_τ N_{τ,β_A^x}: log f_out の z^{Σ a_i v_i} ∏ t_i^{a_i} の係数

    Raises:
        HypothesisError: A が単一の座標ベクトルの倍数
    """
    A = tuple(int(a) for a in A)
    _check_not_simple(A)
    if sum(A) > order:
        raise DomainError(f"Order {order} is below the total degree {sum(A)} of A = {A}")
    engine = engine or HDTV(seed)
    value = log_coefficient(engine.log_at(x, order, "out"), seed, A)
    logger.debug(f"{seed.name}: sum_ktau_N for A = {A} at x = {format_vector(x)} is {value}")
    return value
