"""
散乱図式のデータモデルと問い合わせ

壁 (Wall)・図式 (ScatteringDiagram)・経路順序積・部屋関数・同値判定・ダンプを扱う。
補完と整合性判定は src.completion にある。

壁越えの符号規約（両側で共通）:
    速度 v で壁を横切ると z^e は f^{s·κ(e)} 倍される。
    クイバー側: s = sign⟨γ_𝔡, v⟩, κ(e) = ω_Q(γ_𝔡, e)
    シード側:   s = −sign⟨n_0, v⟩, κ(e) = ⟨n_0, e⟩
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from functools import cmp_to_key
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from src.errors import (
    DimensionError,
    DomainError,
    NonCentralSupportError,
    NonTransverseCrossingError,
    SchemaError,
    SingularPointError,
)
from src.lattice import Side, ccw_compare, cross2, dot, primitive, rot90, same_ray
from src.series import Exponent, SeriesContext, TruncatedSeries, apply_wall_crossing, int_pow, mul

logger = logging.getLogger(__name__)

DUMP_FORMAT = 1


def _sign(value) -> int:
    return (value > 0) - (value < 0)


def _cross3(a: Sequence, b: Sequence) -> tuple:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _det3(a: Sequence, b: Sequence, c: Sequence):
    return dot(a, _cross3(b, c))


def format_vector(vec: Sequence) -> str:
    return "(" + ",".join(str(c) for c in vec) + ")"


# --- サポート ---


@dataclass(frozen=True)
class Cone:
    """
    余次元1の有理多面錐

    normal^⊥ に含まれ、full なら超平面全体、そうでなければ rays の錐包。
    階数2では rays は1本（半直線）、階数3では2本（平面内の2次元錐）。
    offset ≠ 0 は原点を通らない台で、中心的配置モードでは受け付けない。
    """

    normal: Tuple[int, ...]
    rays: Tuple[Tuple[int, ...], ...] = ()
    full: bool = False
    offset: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(int(c) for c in self.normal))
        object.__setattr__(self, "rays", tuple(tuple(int(c) for c in r) for r in self.rays))
        object.__setattr__(self, "offset", Fraction(self.offset))
        n = len(self.normal)
        if all(c == 0 for c in self.normal):
            raise DomainError("Cone normal must be nonzero")
        for r in self.rays:
            if len(r) != n:
                raise DimensionError(f"Cone ray {r} has length {len(r)}, expected {n}")
            if dot(self.normal, r) != 0:
                raise DomainError(f"Cone ray {r} does not lie in the hyperplane {format_vector(self.normal)}^⊥")
        if not self.full and len(self.rays) != n - 1:
            raise DimensionError(f"A proper cone in rank {n} needs {n - 1} generating rays, got {len(self.rays)}")
        if not self.full and n == 3 and cross2_is_parallel(self.rays[0], self.rays[1]):
            raise DomainError(f"Cone rays {self.rays} are parallel")

    @classmethod
    def hyperplane(cls, normal: Sequence[int]) -> "Cone":
        return cls(primitive(normal)[0], (), True)

    @classmethod
    def ray(cls, normal: Sequence[int], generator: Sequence[int]) -> "Cone":
        return cls(primitive(normal)[0], (primitive(generator)[0],), False)

    @classmethod
    def span(cls, normal: Sequence[int], first: Sequence[int], second: Sequence[int]) -> "Cone":
        return cls(primitive(normal)[0], (primitive(first)[0], primitive(second)[0]), False)

    @property
    def ambient_rank(self) -> int:
        return len(self.normal)

    @property
    def is_central(self) -> bool:
        return self.offset == 0

    @property
    def halfspaces(self) -> Tuple[Tuple[int, ...], ...]:
        """台を normal^⊥ の中で切り出す半空間 {x : h·x ≥ 0}"""
        if self.full:
            return ()
        if self.ambient_rank == 2:
            return (self.rays[0],)
        first, second = self.rays
        h1 = _cross3(self.normal, first)
        if dot(h1, second) < 0:
            h1 = tuple(-c for c in h1)
        h2 = _cross3(self.normal, second)
        if dot(h2, first) < 0:
            h2 = tuple(-c for c in h2)
        return (h1, h2)

    def contains(self, x: Sequence) -> bool:
        if dot(self.normal, x) != self.offset:
            return False
        return all(dot(h, x) >= 0 for h in self.halfspaces)

    def on_boundary(self, x: Sequence) -> bool:
        """x が台の相対境界にあるか"""
        return self.contains(x) and any(dot(h, x) == 0 for h in self.halfspaces)

    def line_directions(self) -> Tuple[Tuple[int, ...], ...]:
        """階数2での台の半直線（直線なら向きの逆な2本）"""
        if self.ambient_rank != 2:
            raise DimensionError("line_directions is only defined in rank 2")
        if self.full:
            u = primitive(rot90(self.normal))[0]
            return (u, tuple(-c for c in u))
        return self.rays

    def to_dict(self) -> Dict[str, object]:
        return {
            "normal": list(self.normal),
            "rays": [list(r) for r in self.rays],
            "full": self.full,
            "offset": str(self.offset),
            "halfspaces": [list(h) for h in self.halfspaces],
        }

    def __str__(self):
        if self.full:
            return f"{format_vector(self.normal)}^⊥"
        return "cone" + "".join(format_vector(r) for r in self.rays)


def cross2_is_parallel(a: Sequence, b: Sequence) -> bool:
    return all(c == 0 for c in _cross3(a, b))


# --- 壁と図式 ---


class WallTag(Enum):
    INITIAL = "initial"
    ADDED = "added"
    CENTRAL = "central"


_TAG_ORDER = {WallTag.INITIAL: 0, WallTag.ADDED: 1, WallTag.CENTRAL: 2}


@dataclass(frozen=True)
class Wall:
    """
    壁 (台, 方向, 壁関数)

    direction はクイバー側では原始的な γ_𝔡、シード側では原始的な m_0。
    index はタイブレーク用（初期壁の頂点番号または t の添字）。
    """

    support: Cone
    direction: Tuple[int, ...]
    function: TruncatedSeries
    tag: WallTag = WallTag.INITIAL
    label: str = ""
    index: int = -1

    def __post_init__(self):
        object.__setattr__(self, "direction", tuple(int(c) for c in self.direction))
        if not self.function.is_unit_series():
            raise DomainError(f"Wall function of {self.label or self.direction} must have constant term 1")

    def sort_key(self) -> tuple:
        return (_TAG_ORDER[self.tag], self.index, self.label)

    def with_function(self, function: TruncatedSeries) -> "Wall":
        return replace(self, function=function)

    def __str__(self):
        return f"Wall({self.label}: {self.support}, dir={format_vector(self.direction)}, {self.tag.value})"


@dataclass(frozen=True)
class DiagramContext:
    """
    図式の格子データ

    skew はクイバー側の ω_Q（シード側では ω）。v_vectors はシード由来の図式で
    m = Σ a_i v_i を検査するために持つ。
    """

    side: Side
    ambient_rank: int
    t_count: int = 0
    skew: Tuple[Tuple[int, ...], ...] = ()
    v_vectors: Tuple[Tuple[int, ...], ...] = ()
    name: str = ""

    @property
    def series_context(self) -> SeriesContext:
        return SeriesContext(self.side, self.ambient_rank, self.t_count)

    def iota(self, gamma: Sequence[int]) -> Tuple[int, ...]:
        """ι_γ ω（クイバー側）"""
        n = self.ambient_rank
        return tuple(sum(gamma[i] * self.skew[i][j] for i in range(n)) for j in range(n))

    def to_dict(self) -> Dict[str, object]:
        return {
            "side": self.side.value,
            "ambient_rank": self.ambient_rank,
            "t_count": self.t_count,
            "skew": [list(r) for r in self.skew],
            "v_vectors": [list(v) for v in self.v_vectors],
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "DiagramContext":
        return cls(
            Side(data["side"]),
            int(data["ambient_rank"]),
            int(data.get("t_count", 0)),
            tuple(tuple(int(c) for c in r) for r in data.get("skew", ())),
            tuple(tuple(int(c) for c in v) for v in data.get("v_vectors", ())),
            str(data.get("name", "")),
        )


def crossing_power(context: DiagramContext, wall: Wall, velocity: Sequence) -> int:
    """壁越えの符号 s（横断的でなければ例外）"""
    pairing = dot(wall.support.normal, velocity)
    if pairing == 0:
        raise NonTransverseCrossingError(f"Path is tangent to {wall.label or wall}: velocity {tuple(velocity)}")
    return _sign(pairing) if context.side is Side.QUIVER else -_sign(pairing)


def exponent_pairing(context: DiagramContext, wall: Wall) -> Callable[[Exponent], int]:
    """κ: 指数 → 整数"""
    n = context.ambient_rank
    if context.side is Side.QUIVER:
        row = context.iota(wall.direction)
        return lambda e: sum(row[j] * e[j] for j in range(n))
    normal = wall.support.normal
    return lambda e: sum(normal[j] * e[j] for j in range(n))


@dataclass(frozen=True)
class ScatteringDiagram:
    """文脈・壁の有限リスト・信頼できる次数"""

    context: DiagramContext
    walls: Tuple[Wall, ...]
    order: int

    def __post_init__(self):
        walls = []
        for wall in self.walls:
            _check_wall(self.context, wall)
            # γ_𝔡 ∈ ker ω_Q の壁は付け方によらず central
            if self.context.side is Side.QUIVER and wall.tag is not WallTag.CENTRAL and is_central(wall, self.context):
                wall = replace(wall, tag=WallTag.CENTRAL)
            walls.append(wall)
        object.__setattr__(self, "walls", tuple(walls))

    @property
    def ambient_rank(self) -> int:
        return self.context.ambient_rank

    def initial_walls(self) -> Tuple[Wall, ...]:
        return tuple(w for w in self.walls if w.tag is WallTag.INITIAL)

    def added_walls(self) -> Tuple[Wall, ...]:
        return tuple(w for w in self.walls if w.tag is WallTag.ADDED)

    def central_walls(self) -> Tuple[Wall, ...]:
        return tuple(w for w in self.walls if w.tag is WallTag.CENTRAL)

    def with_walls(self, walls: Iterable[Wall], order: Optional[int] = None) -> "ScatteringDiagram":
        return ScatteringDiagram(self.context, tuple(walls), self.order if order is None else order)

    def truncate(self, order: int) -> "ScatteringDiagram":
        """次数 order に切り詰める（関数が 1 になった壁は落とす）"""
        walls = []
        for wall in self.walls:
            f = wall.function.truncate(order)
            if not f.is_one():
                walls.append(wall.with_function(f))
        return ScatteringDiagram(self.context, tuple(walls), order)

    def __str__(self):
        return f"ScatteringDiagram({self.context.name}, {len(self.walls)} walls, order={self.order})"


def _check_wall(context: DiagramContext, wall: Wall) -> None:
    if wall.support.ambient_rank != context.ambient_rank:
        raise DimensionError(f"Wall {wall.label} lives in rank {wall.support.ambient_rank}, diagram rank is {context.ambient_rank}")
    if wall.function.context != context.series_context:
        raise DimensionError(f"Wall {wall.label} function context {wall.function.context} does not match the diagram")
    if context.side is Side.QUIVER:
        if primitive(wall.direction)[0] != wall.direction or any(c < 0 for c in wall.direction):
            raise DomainError(f"Quiver wall direction {wall.direction} must be primitive in N_Q^+")
        if wall.support.normal != wall.direction:
            raise DomainError(f"Wall {wall.label}: support is not contained in {format_vector(wall.direction)}^⊥")
    else:
        if dot(wall.support.normal, wall.direction) != 0:
            raise DomainError(f"Wall {wall.label}: direction {wall.direction} is not in the support hyperplane")


def wall_label(tag: WallTag, direction: Sequence[int], support: Cone) -> str:
    return f"{tag.value}:{format_vector(direction)}@{support}"


# --- 問い合わせ ---


def is_incoming(wall: Wall, context: DiagramContext) -> bool:
    """
    流入壁か

    クイバー側は ι_{γ_𝔡}ω_Q ∈ 𝔡、シード側は m_0 ∈ 𝔡 のとき真。
    """
    if context.side is Side.QUIVER:
        point = context.iota(wall.direction)
    else:
        point = wall.direction
    return wall.support.contains(point)


def is_central(wall: Wall, context: DiagramContext) -> bool:
    """γ_𝔡 ∈ ker ω_Q"""
    if context.side is not Side.QUIVER:
        raise DomainError("Central walls are only defined on the quiver side")
    return all(c == 0 for c in context.iota(wall.direction))


def remove_central_walls(diagram: ScatteringDiagram) -> ScatteringDiagram:
    """中心的な壁を取り除いた部分図式"""
    kept = tuple(w for w in diagram.walls if not is_central(w, diagram.context))
    removed = len(diagram.walls) - len(kept)
    if removed:
        logger.info(f"Removed {removed} central walls from {diagram.context.name}")
    return diagram.with_walls(kept)


def _as_point(diagram: ScatteringDiagram, x) -> Tuple[Fraction, ...]:
    coords = tuple(Fraction(c) for c in getattr(x, "coords", x))
    if len(coords) != diagram.ambient_rank:
        raise DimensionError(f"Point {coords} has length {len(coords)}, expected {diagram.ambient_rank}")
    return coords


def singular_walls(diagram: ScatteringDiagram, x) -> List[str]:
    """x ∈ Sing(𝔇) の原因となる壁のラベル（空なら一般の点）"""
    point = _as_point(diagram, x)
    through = [w for w in diagram.walls if w.support.contains(point)]
    offending = {w.label for w in through if w.support.on_boundary(point)}
    for i, a in enumerate(through):
        for b in through[i + 1 :]:
            if not cross2_is_parallel_any(a.support.normal, b.support.normal):
                offending.update((a.label, b.label))
    return sorted(offending)


def cross2_is_parallel_any(a: Sequence, b: Sequence) -> bool:
    if len(a) == 2:
        return cross2(a, b) == 0
    return cross2_is_parallel(a, b)


def chamber_function(diagram: ScatteringDiagram, x) -> TruncatedSeries:
    """
    f_{𝔇,x}: x を含む壁の関数の積

    Raises:
        SingularPointError: x ∈ Sing(𝔇)
    """
    point = _as_point(diagram, x)
    offending = singular_walls(diagram, point)
    if offending:
        raise SingularPointError(f"Point {format_vector(point)} lies in Sing(D)", offending)
    result = TruncatedSeries.one(diagram.context.series_context, diagram.order)
    for wall in diagram.walls:
        if wall.support.contains(point):
            result = mul(result, wall.function.truncate(diagram.order))
    return result


# --- 経路順序積 ---


@dataclass(frozen=True)
class Automorphism:
    """
    生成元の像で表した自己同型

    ratios[j] は z^{b_j} の像を z^{b_j} で割ったもの（b_j は格子の標準基底）。
    t 変数は固定される。
    """

    context: DiagramContext
    order: int
    ratios: Tuple[TruncatedSeries, ...]

    @classmethod
    def identity(cls, context: DiagramContext, order: int) -> "Automorphism":
        one = TruncatedSeries.one(context.series_context, order)
        return cls(context, order, tuple(one for _ in range(context.ambient_rank)))

    def is_identity(self) -> bool:
        return all(r.is_one() for r in self.ratios)

    def defect_terms(self) -> Dict[Exponent, Tuple[Fraction, ...]]:
        """R_j − 1 の項を指数ごとにまとめる"""
        zero = self.context.series_context.zero()
        out: Dict[Exponent, List[Fraction]] = {}
        for j, ratio in enumerate(self.ratios):
            for e, c in ratio.terms.items():
                if e == zero:
                    c = c - 1
                if c:
                    out.setdefault(e, [Fraction(0)] * len(self.ratios))[j] = c
        return {e: tuple(v) for e, v in out.items()}

    def lowest_defect(self) -> Tuple[Optional[int], Dict[Exponent, Tuple[Fraction, ...]]]:
        """最低次の欠陥（恒等写像なら (None, {})）"""
        terms = self.defect_terms()
        if not terms:
            return None, {}
        deg = self.context.series_context.degree
        low = min(deg(e) for e in terms)
        return low, {e: v for e, v in terms.items() if deg(e) == low}

    def apply(self, series: TruncatedSeries) -> TruncatedSeries:
        """級数に作用させる"""
        ctx = self.context.series_context
        if series.context != ctx:
            raise DimensionError(f"Series context {series.context} does not match {ctx}")
        order = min(self.order, series.order)
        ratios = [r.truncate(order) for r in self.ratios]
        powers: Dict[Tuple[int, int], TruncatedSeries] = {}
        result = TruncatedSeries.zero(ctx, order)
        for e, c in series.terms.items():
            image = TruncatedSeries.monomial(ctx, order, e, c)
            for j in range(self.context.ambient_rank):
                if e[j]:
                    key = (j, e[j])
                    if key not in powers:
                        powers[key] = int_pow(ratios[j], e[j])
                    image = mul(image, powers[key])
            result = result + image
        return result


def _power(f: TruncatedSeries, k: int, cache: Dict[int, TruncatedSeries]) -> TruncatedSeries:
    if k == 0:
        return TruncatedSeries.one(f.context, f.order)
    power = cache.get(k)
    if power is None or power.order != f.order:
        power = int_pow(f, k)
        cache[k] = power
    return power


def cross_wall(
    automorphism: Automorphism,
    wall: Wall,
    power: int,
    caches: Optional[Dict[int, Dict[int, TruncatedSeries]]] = None,
) -> Automorphism:
    """
    壁越え写像を後から合成する（最初に越えた壁が最初に作用する）

    Args:
        automorphism: それまでの合成
        wall: 越える壁
        power: 符号 s（±1）
        caches: 壁ごとの冪キャッシュ
    """
    context = automorphism.context
    order = automorphism.order
    f = wall.function.truncate(order)
    kappa = exponent_pairing(context, wall)
    cache = {} if caches is None else caches.setdefault(id(wall), {})
    if cache and next(iter(cache.values())).order != order:
        cache.clear()
    exponent_of = lambda e: power * kappa(e)
    basis = [tuple(1 if k == j else 0 for k in range(context.ambient_rank)) + (0,) * context.t_count for j in range(context.ambient_rank)]
    ratios = []
    for j, ratio in enumerate(automorphism.ratios):
        image = apply_wall_crossing(ratio, f, exponent_of, cache)
        k = exponent_of(basis[j])
        if k:
            image = mul(image, _power(f, k, cache))
        ratios.append(image)
    return Automorphism(context, order, tuple(ratios))


@dataclass(frozen=True)
class Crossing:
    """経路が点 point を速度 velocity で通過する"""

    point: Tuple[Fraction, ...]
    velocity: Tuple[Fraction, ...]


def path_ordered_product(
    diagram: ScatteringDiagram, path: Sequence[Crossing], order: Optional[int] = None
) -> Automorphism:
    """
    経路順序積

    各通過点で、その点を含む壁すべての壁越え写像を（タイブレーク順に）合成する。

    Raises:
        NonTransverseCrossingError: 通過が壁に接している
    """
    order = diagram.order if order is None else order
    auto = Automorphism.identity(diagram.context, order)
    caches: Dict[int, Dict[int, TruncatedSeries]] = {}
    for crossing in path:
        point = _as_point(diagram, crossing.point)
        velocity = tuple(Fraction(c) for c in crossing.velocity)
        walls = sorted((w for w in diagram.walls if w.support.contains(point)), key=Wall.sort_key)
        for wall in walls:
            auto = cross_wall(auto, wall, crossing_power(diagram.context, wall, velocity), caches)
    return auto


def _ray_compare(a: Tuple[tuple, Wall], b: Tuple[tuple, Wall]) -> int:
    c = ccw_compare(a[0], b[0])
    if c:
        return c
    ka, kb = a[1].sort_key(), b[1].sort_key()
    return (ka > kb) - (ka < kb)


def loop_crossings(walls: Sequence[Wall]) -> List[Tuple[tuple, Wall]]:
    """
    原点を反時計回りに一周する経路が越える (半直線, 壁) の列（階数2）

    同じ半直線上の壁は初期壁→追加壁、次に添字の順に並べる。
    """
    items = [(u, w) for w in walls for u in w.support.line_directions()]
    return sorted(items, key=cmp_to_key(_ray_compare))


def loop_product(diagram: ScatteringDiagram, order: Optional[int] = None, walls: Optional[Sequence[Wall]] = None) -> Automorphism:
    """原点のまわりの一周の経路順序積（階数2）"""
    if diagram.ambient_rank != 2:
        raise DimensionError("loop_product needs an ambient rank 2 diagram")
    for wall in diagram.walls if walls is None else walls:
        if not wall.support.is_central:
            raise NonCentralSupportError(f"Wall {wall.label} does not pass through the origin")
    order = diagram.order if order is None else order
    auto = Automorphism.identity(diagram.context, order)
    caches: Dict[int, Dict[int, TruncatedSeries]] = {}
    for u, wall in loop_crossings(diagram.walls if walls is None else walls):
        auto = cross_wall(auto, wall, crossing_power(diagram.context, wall, rot90(u)), caches)
    return auto


# --- 標準形と同値 ---


def _support_key(cone: Cone) -> tuple:
    return (cone.normal, cone.full, tuple(sorted(cone.rays)), cone.offset)


def canonical_form(diagram: ScatteringDiagram) -> ScatteringDiagram:
    """
    同じ台と方向を持つ壁を関数の積でまとめ、関数 1 の壁を落とす

    タグは最初に現れた壁のものを残す。壁は台と方向で整列する。
    """
    merged: Dict[tuple, Wall] = {}
    for wall in diagram.walls:
        key = (_support_key(wall.support), wall.direction)
        if key in merged:
            first = merged[key]
            merged[key] = first.with_function(mul(first.function, wall.function))
        else:
            merged[key] = wall
    walls = [w for w in merged.values() if not w.function.truncate(diagram.order).is_one()]
    walls.sort(key=lambda w: (_support_key(w.support), w.direction))
    return diagram.with_walls(walls)


def _plane_basis(normal: Sequence[int]) -> Tuple[tuple, tuple]:
    """normal^⊥ を張る2本の整数ベクトル"""
    candidates = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    vectors = [c for c in (_cross3(normal, e) for e in candidates) if any(c)]
    first = vectors[0]
    for second in vectors[1:]:
        if not cross2_is_parallel(first, second):
            return first, second
    raise DomainError(f"Cannot span the plane orthogonal to {tuple(normal)}")


def _sector_midpoints_2d(rays: Sequence[tuple]) -> List[tuple]:
    rays = sort_unique_rays(rays)
    if not rays:
        return [(Fraction(1), Fraction(0))]
    if len(rays) == 1:
        u = rays[0]
        return [tuple(-c for c in u), rot90(u)]
    points = []
    for a, b in zip(rays, rays[1:] + rays[:1]):
        c = cross2(a, b)
        if c > 0:
            points.append((a[0] + b[0], a[1] + b[1]))
        elif c < 0:
            points.append((-(a[0] + b[0]), -(a[1] + b[1])))
        else:
            points.append(rot90(a))
    return points


def sort_unique_rays(rays: Iterable[Sequence]) -> List[tuple]:
    out: List[tuple] = []
    for r in sorted((tuple(r) for r in rays), key=cmp_to_key(ccw_compare)):
        if not out or not same_ray(out[-1], r):
            out.append(r)
    return out


def sample_points(diagrams: Sequence[ScatteringDiagram]) -> List[Tuple[Fraction, ...]]:
    """
    共通の配置の各胞から1点ずつ取った一般の点

    階数2では各半直線上の点と扇形の中点、階数3では各壁平面の中で
    他の平面・錐の境界が切る扇形の中点をとる。
    """
    rank = diagrams[0].ambient_rank
    walls = [w for d in diagrams for w in d.walls]
    if rank == 2:
        rays = [u for w in walls for u in w.support.line_directions()]
        unique = sort_unique_rays(rays)
        points = list(unique) + _sector_midpoints_2d(unique)
        return [tuple(Fraction(c) for c in p) for p in points]
    if rank != 3:
        raise DimensionError(f"Sampling is implemented for ambient rank 2 and 3, got {rank}")
    points: List[tuple] = []
    normals = []
    for w in walls:
        if not any(cross2_is_parallel(w.support.normal, n) for n in normals):
            normals.append(w.support.normal)
    for n in normals:
        b1, b2 = _plane_basis(n)
        cuts = []
        for other in normals:
            if not cross2_is_parallel(other, n):
                line = _cross3(n, other)
                cuts.extend([line, tuple(-c for c in line)])
        for w in walls:
            if cross2_is_parallel(w.support.normal, n):
                cuts.extend(w.support.rays)
        denom = _det3(n, b1, b2)
        planar = [(_det3(n, c, b2) * _sign(denom), _det3(n, b1, c) * _sign(denom)) for c in cuts]
        for p, q in _sector_midpoints_2d(planar):
            points.append(tuple(p * a + q * b for a, b in zip(b1, b2)))
    return [tuple(Fraction(c) for c in p) for p in points]


def find_disagreement(
    d1: ScatteringDiagram, d2: ScatteringDiagram
) -> Optional[Tuple[Tuple[Fraction, ...], TruncatedSeries, TruncatedSeries]]:
    """部屋関数が一致しない最初の標本点（なければ None）"""
    if d1.context.series_context != d2.context.series_context or d1.ambient_rank != d2.ambient_rank:
        raise DimensionError(f"Cannot compare diagrams over different contexts: {d1.context.name} vs {d2.context.name}")
    order = min(d1.order, d2.order)
    left, right = d1.truncate(order), d2.truncate(order)
    for point in sample_points([left, right]):
        if singular_walls(left, point) or singular_walls(right, point):
            continue
        f1, f2 = chamber_function(left, point), chamber_function(right, point)
        if f1 != f2:
            logger.info(f"Diagrams disagree at {format_vector(point)}")
            return point, f1, f2
    return None


def equivalent(d1: ScatteringDiagram, d2: ScatteringDiagram) -> bool:
    """標本点すべてで部屋関数が一致するか"""
    return find_disagreement(d1, d2) is None


# --- ダンプ ---


def dump(diagram: ScatteringDiagram) -> Dict[str, object]:
    """図式の JSON 形式"""
    records = []
    for wall in diagram.walls:
        records.append(
            {
                "tag": wall.tag.value,
                "label": wall.label,
                "index": wall.index,
                "support": wall.support.to_dict(),
                "direction": list(wall.direction),
                "function": wall.function.to_json()["terms"],
            }
        )
    return {"format": DUMP_FORMAT, "context": diagram.context.to_dict(), "order": diagram.order, "walls": records}


def load_diagram(data: Mapping[str, object], path: Optional[str] = None) -> ScatteringDiagram:
    """dump の逆"""
    try:
        if int(data.get("format", 0)) != DUMP_FORMAT:
            raise SchemaError(f"Unsupported diagram format {data.get('format')!r}", path, "format")
        context = DiagramContext.from_dict(data["context"])
        order = int(data["order"])
        series_ctx = context.series_context
        walls = []
        for i, record in enumerate(data["walls"]):
            support = record["support"]
            cone = Cone(
                tuple(support["normal"]),
                tuple(tuple(r) for r in support.get("rays", ())),
                bool(support.get("full", False)),
                Fraction(support.get("offset", "0")),
            )
            terms = {}
            for lattice_part, t_part, num, den in record["function"]:
                terms[series_ctx.make(lattice_part, t_part)] = Fraction(int(num), int(den))
            walls.append(
                Wall(
                    cone,
                    tuple(record["direction"]),
                    TruncatedSeries(series_ctx, order, terms),
                    WallTag(record.get("tag", "added")),
                    str(record.get("label", "")),
                    int(record.get("index", -1)),
                )
            )
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"Malformed diagram dump: missing or invalid {exc}", path, "walls") from exc
    return ScatteringDiagram(context, tuple(walls), order)
