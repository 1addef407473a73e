"""
ψ に沿った引き戻しと、クイバー側・シード側の対応の検証

クイバー側の DT 不変量（階数3以上では引き戻し経路で定義）とシード側の
log f_out の係数を突き合わせる。局所 P² の層の DT 不変量もここで扱う。
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from src.errors import DimensionError, DomainError, EngineError, HypothesisError
from src.generator import ANTI_ATTRACTOR, ATTRACTOR, SampleGenerator
from src.lattice import (
    CompatibilityMap,
    Quiver,
    Side,
    SymplecticSeed,
    cross2,
    divisibility,
    dot,
    iter_dimension_vectors,
    primitive,
    quadratic_sign,
    rot90,
)
from src.scattering import Cone, ScatteringDiagram, Wall, find_disagreement, format_vector, is_central, remove_central_walls
from src.series import int_pow
from .hdtv import HDTV, SIMPLE_CONDITION, gw_combination, log_coefficient, seed_context
from .presets import Preset
from .quiver_dt import (
    KERNEL_CONDITION,
    DTRecord,
    QuiverDT,
    _validate_query,
    dt_invariants,
    integer_from_rational,
    rational_from_integer,
)

logger = logging.getLogger(__name__)

SLOPE_CONDITION = "−1<μ≤0"


def _index_set(skew: Sequence[Sequence[int]]) -> Tuple[int, ...]:
    return tuple(i for i, row in enumerate(skew) if any(row))


# --- 引き戻し ---


def _preimage(support: Cone, psi: CompatibilityMap, normal: Sequence[int]) -> Optional[Cone]:
    """
    (ψ∨)^{-1}(𝔡) ⊂ M_ℝ（2次元）

    ψ(γ)^⊥ = ℝw の上で、𝔡 を切り出す半空間 h·θ ≥ 0 は ψ(h)·x ≥ 0 になる。
    """
    w = primitive(rot90(normal))[0]
    pairings = [dot(psi.apply(h), w) for h in support.halfspaces]
    forward = all(p >= 0 for p in pairings)
    backward = all(p <= 0 for p in pairings)
    if forward and backward:
        return Cone.hyperplane(normal)
    if forward:
        return Cone.ray(normal, w)
    if backward:
        return Cone.ray(normal, tuple(-c for c in w))
    return None


def pullback(qdiagram: ScatteringDiagram, psi: CompatibilityMap, seed: SymplecticSeed) -> ScatteringDiagram:
    """
    (ψ∨)⋆𝔇: 各壁 (𝔡, f) を ((ψ∨)^{-1}(𝔡), φ(f)^{|ψ(γ_𝔡)|}) に写す

    φ(z^{kγ}) = z^{k ι_{ψ(γ)}ω} ∏ t_i^{kγ_i}。像が原点だけになる壁は落とす。

    Raises:
        DomainError: 中心的な壁、または I の外に台を持つ方向がある
    """
    context = qdiagram.context
    if context.side is not Side.QUIVER:
        raise DomainError("pullback expects a quiver-side diagram")
    if psi.source_rank != context.ambient_rank or psi.target_rank != seed.rank:
        raise DimensionError(
            f"psi has shape {psi.target_rank}x{psi.source_rank}, expected {seed.rank}x{context.ambient_rank}"
        )
    if seed.rank != 2:
        raise DimensionError(f"Pullbacks are computed into rank 2 seeds, got rank {seed.rank}")
    index_set = _index_set(context.skew)
    target = seed_context(seed)
    series_ctx = target.series_context

    def phi(exponent):
        lattice = seed.iota(psi.apply(exponent))
        return series_ctx.make(lattice, tuple(exponent[i] for i in index_set))

    walls: List[Wall] = []
    dropped = 0
    for wall in qdiagram.walls:
        if is_central(wall, context):
            raise DomainError(f"Wall {wall.label} is central; apply remove_central_walls first")
        outside = [i + 1 for i, c in enumerate(wall.direction) if c and i not in index_set]
        if outside:
            raise DomainError(f"Wall {wall.label} has direction supported at vertices {outside} outside I")
        image = psi.apply(wall.direction)
        normal, size = primitive(image)
        support = _preimage(wall.support, psi, normal)
        if support is None:
            dropped += 1
            continue
        mapped = wall.function.map_exponents(phi, series_ctx, qdiagram.order)
        direction = primitive(seed.iota(image))[0]
        walls.append(Wall(support, direction, int_pow(mapped, size), wall.tag, f"psi*{wall.label}", wall.index))
    if dropped:
        logger.debug(f"pullback dropped {dropped} walls with empty preimage")
    return ScatteringDiagram(target, tuple(walls), qdiagram.order)


# --- 比較定理 ---


@dataclass
class ComparisonReport:
    """(ψ∨)⋆𝔇̄ と 𝔇_{s,Σ} の比較"""

    preset: str
    order: int
    equivalent: bool
    quiver_walls: int = 0
    seed_walls: int = 0
    witness: Optional[Tuple[Fraction, ...]] = None
    pulled_function: str = ""
    seed_function: str = ""

    def to_dict(self) -> Dict[str, object]:
        data = {
            "preset": self.preset,
            "order": self.order,
            "equivalent": self.equivalent,
            "quiver_walls": self.quiver_walls,
            "seed_walls": self.seed_walls,
        }
        if self.witness is not None:
            data["witness"] = [str(c) for c in self.witness]
            data["pulled_function"] = self.pulled_function
            data["seed_function"] = self.seed_function
        return data


def verify_comparison(
    preset: Preset, order: int, quiver_engine: Optional[QuiverDT] = None, seed_engine: Optional[HDTV] = None
) -> ComparisonReport:
    """
    補完したクラスター図式から中心的な壁を除いて引き戻し、補完した HDTV 図式と比べる

    Raises:
        DimensionError: クイバーの頂点が2個でない
    """
    if preset.quiver.vertex_count != 2:
        raise DimensionError(f"verify_comparison needs a 2-vertex quiver, {preset.name} has {preset.quiver.vertex_count}")
    quiver_engine = quiver_engine or QuiverDT(preset.quiver)
    seed_engine = seed_engine or HDTV(preset.seed)
    qdiagram = remove_central_walls(quiver_engine.process(order))
    pulled = pullback(qdiagram, preset.psi, preset.seed)
    sdiagram = seed_engine.process(order)
    disagreement = find_disagreement(pulled, sdiagram)
    report = ComparisonReport(preset.name, order, disagreement is None, len(qdiagram.walls), len(sdiagram.walls))
    if disagreement is not None:
        point, left, right = disagreement
        report.witness = point
        report.pulled_function = repr(left)
        report.seed_function = repr(right)
    logger.info(f"{preset.name}: comparison at order {order}: {'equivalent' if report.equivalent else 'DIFFERENT'}")
    return report


# --- シード側経路の DT 不変量 ---


def is_relatively_general(quiver: Quiver, psi: CompatibilityMap, theta: Sequence, gamma: Sequence[int], bound: int) -> bool:
    """
    ψ∨(M_ℝ) に相対的な γ-一般性

    θ(γ') = 0 となる γ'（総次数 ≤ bound）について ψ(γ') が ψ(γ) と共線なら真。
    """
    image = psi.apply(gamma)
    for candidate in iter_dimension_vectors(quiver.vertex_count, bound):
        if dot(theta, candidate) != 0:
            continue
        if cross2(psi.apply(candidate), image) != 0:
            logger.debug(f"theta {tuple(theta)} is not relatively general for {tuple(gamma)}: vanishes on {candidate}")
            return False
    return True


def _seed_point(preset: Preset, theta: Sequence[Fraction]) -> Tuple[Fraction, ...]:
    if all(c == 0 for c in theta):
        raise DomainError("θ = 0 has no preimage off the origin")
    x = preset.psi.dual_preimage(theta)
    if x is None or preset.psi.dual(x) != tuple(theta):
        raise DomainError(f"θ = {format_vector(theta)} is not in ψ∨(M_ℝ)")
    return x


def _multiplicities(quiver: Quiver, gamma: Sequence[int]) -> Tuple[int, ...]:
    index_set = quiver.index_set
    outside = [i + 1 for i, c in enumerate(gamma) if c and i not in index_set]
    if outside:
        raise DomainError(f"{tuple(gamma)} is supported at vertices {outside} outside I")
    return tuple(gamma[i] for i in index_set)


def _seed_chamber(seed: SymplecticSeed, A: Sequence[int], x: Sequence) -> str:
    m = seed.m_of(A)
    return ATTRACTOR if dot(m, x) > 0 else ANTI_ATTRACTOR


def dt_via_seed(
    preset: Preset, gamma: Sequence[int], theta: Sequence, order: int, engine: Optional[HDTV] = None
) -> DTRecord:
    """
    シード側の部屋関数から読む Ω̄_γ^{+,θ}

    x = (ψ∨)^{-1}(θ) での log の z^{ι_{ψ(γ)}ω} ∏ t_i^{γ_i} の係数を |ψ(γ)| で割る。

    Raises:
        DomainError: θ が ψ∨(M_ℝ) にない、または相対的に一般でない
    """
    quiver, seed, psi = preset.quiver, preset.seed, preset.psi
    gamma, theta = _validate_query(quiver, gamma, theta, order, check_general=False)
    x = _seed_point(preset, theta)
    if not is_relatively_general(quiver, psi, theta, gamma, order):
        raise DomainError(f"θ = {format_vector(theta)} is not {gamma}-general relative to ψ∨(M_ℝ) up to degree {order}")
    _multiplicities(quiver, gamma)
    engine = engine or HDTV(seed)
    f = engine.log_at(x, order, "chamber")
    gamma0, k = primitive(gamma)
    top = order // sum(gamma0)
    bars: Dict[int, Fraction] = {}
    for j in range(1, top + 1):
        multiple = tuple(j * c for c in gamma0)
        bars[j] = log_coefficient(f, seed, _multiplicities(quiver, multiple)) / psi.image_divisibility(multiple)
    ints = integer_from_rational(bars, gamma0, quadratic_sign(quiver, gamma0))
    note = _seed_chamber(seed, _multiplicities(quiver, gamma), x)
    record = DTRecord(gamma, theta, bars[k], ints[k], note, bars, ints, route="seed")
    logger.info(f"{quiver.name}: Ω{gamma} = {record.omega} at θ = {format_vector(theta)} ({note}, seed route)")
    return record


# --- 主定理の検証 ---


@dataclass
class MainCheck:
    """1つの (γ, 部屋) での比較"""

    gamma: Tuple[int, ...]
    chamber: str
    x: Tuple[Fraction, ...]
    theta: Tuple[Fraction, ...]
    gamma_divisibility: int
    image_divisibility: int
    omega_bar: Fraction
    quiver_value: Fraction
    sum_ktau_N: Fraction
    route: str

    @property
    def ok(self) -> bool:
        return self.quiver_value == self.sum_ktau_N

    def to_dict(self) -> Dict[str, object]:
        return {
            "gamma": list(self.gamma),
            "chamber": self.chamber,
            "x": [str(c) for c in self.x],
            "theta": [str(c) for c in self.theta],
            "divisibility": self.gamma_divisibility,
            "image_divisibility": self.image_divisibility,
            "omega_bar": str(self.omega_bar),
            "image_divisibility_times_omega_bar": str(self.quiver_value),
            "sum_ktau_N": str(self.sum_ktau_N),
            "route": self.route,
            "ok": self.ok,
        }


@dataclass
class MainReport:
    """verify_main の結果"""

    preset: str
    order: int
    checks: List[MainCheck] = field(default_factory=list)
    diagnostics: List[Dict[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> List[MainCheck]:
        return [c for c in self.checks if not c.ok]

    def to_dict(self) -> Dict[str, object]:
        return {
            "preset": self.preset,
            "order": self.order,
            "ok": self.ok,
            "checked": len(self.checks),
            "checks": [c.to_dict() for c in self.checks],
            "diagnostics": self.diagnostics,
        }


def default_gammas(quiver: Quiver, order: int) -> List[Tuple[int, ...]]:
    """次数 order までの γ ∉ ker ω_Q, γ ∉ ℤ_{≥1}s_i"""
    return [
        g
        for g in iter_dimension_vectors(quiver.vertex_count, order)
        if sum(1 for c in g if c) > 1 and not quiver.in_kernel(g)
    ]


def _hypothesis_problem(quiver: Quiver, gamma: Tuple[int, ...], order: int) -> Optional[Tuple[str, str]]:
    if len(gamma) != quiver.vertex_count:
        return "dimension", f"length {len(gamma)}, expected {quiver.vertex_count}"
    if any(c < 0 for c in gamma) or not any(gamma):
        return "domain", "not in N_Q^+"
    if quiver.in_kernel(gamma):
        return "hypothesis", KERNEL_CONDITION
    if sum(1 for c in gamma if c) == 1:
        return "hypothesis", SIMPLE_CONDITION
    if sum(gamma) > order:
        return "domain", f"total degree {sum(gamma)} exceeds order {order}"
    return None


def verify_main(
    preset: Preset,
    gammas: Optional[Iterable[Sequence[int]]] = None,
    order: int = 6,
    sample_seed: int = 0,
    quiver_engine: Optional[QuiverDT] = None,
    seed_engine: Optional[HDTV] = None,
) -> MainReport:
    """
    各 γ と各部屋で |ψ(γ)|·Ω̄_γ^{+,θ} と Σ_τ k_τ N_{τ,β} を比べる

    2頂点のクイバーではクイバー側を独立に補完し、それ以外はシード側の部屋関数から
    読む。仮定を満たさない γ は例外ではなく diagnostics に載せる。
    """
    quiver, seed, psi = preset.quiver, preset.seed, preset.psi
    generator = SampleGenerator(sample_seed)
    seed_engine = seed_engine or HDTV(seed)
    two_vertices = quiver.vertex_count == 2
    if two_vertices:
        quiver_engine = quiver_engine or QuiverDT(quiver)
    report = MainReport(preset.name, order)
    candidates = default_gammas(quiver, order) if gammas is None else [tuple(int(c) for c in g) for g in gammas]
    for gamma in candidates:
        problem = _hypothesis_problem(quiver, gamma, order)
        if problem is not None:
            kind, condition = problem
            report.diagnostics.append({"gamma": list(gamma), "kind": kind, "condition": condition})
            logger.warning(f"{preset.name}: skipped {gamma}: {condition}")
            continue
        A = _multiplicities(quiver, gamma)
        m = seed.m_of(A)
        for note, sign in ((ATTRACTOR, 1), (ANTI_ATTRACTOR, -1)):
            k = generator.scale()
            x = tuple(Fraction(sign * k * c) for c in m)
            theta = psi.dual(x)
            try:
                if two_vertices:
                    record = dt_invariants(quiver, gamma, theta, order, engine=quiver_engine)
                else:
                    record = dt_via_seed(preset, gamma, theta, order, engine=seed_engine)
                value = gw_combination(seed, A, x, order, engine=seed_engine)
            except EngineError as exc:
                report.diagnostics.append({"gamma": list(gamma), "chamber": note, "kind": exc.kind, "condition": str(exc)})
                logger.warning(f"{preset.name}: {gamma} ({note}) failed: {exc}")
                continue
            size = psi.image_divisibility(gamma)
            check = MainCheck(
                gamma, note, x, theta, divisibility(gamma), size, record.omega_bar, size * record.omega_bar, value, record.route
            )
            report.checks.append(check)
            if not check.ok:
                logger.warning(f"{preset.name}: {gamma} ({note}): {check.quiver_value} != {check.sum_ktau_N}")
    logger.info(f"{preset.name}: main-theorem check at order {order}: {len(report.checks)} checks, ok={report.ok}")
    return report


# --- 局所 P² ---


@dataclass(frozen=True)
class ChernImage:
    """v = (r, d, χ) と γ(v) = (−χ, r+d−χ, r+2d−χ)"""

    v: Tuple[int, int, int]
    gamma: Tuple[int, int, int]

    @property
    def effective(self) -> bool:
        return all(c >= 0 for c in self.gamma)

    def to_dict(self) -> Dict[str, object]:
        return {"v": list(self.v), "gamma": list(self.gamma), "effective": self.effective}


def gamma_of_chern(v: Sequence[int]) -> ChernImage:
    if len(v) != 3:
        raise DimensionError(f"Chern data must be (r, d, chi), got {tuple(v)}")
    r, d, chi = (int(c) for c in v)
    return ChernImage((r, d, chi), (-chi, r + d - chi, r + 2 * d - chi))


def local_p2_sheaf_dt(v: Sequence[int], order: int, preset: Optional[Preset] = None, engine: Optional[HDTV] = None) -> DTRecord:
    """
    傾き −1 < μ ≤ 0 の層の Ω̄_v^+ = Ω̄_{γ(v)}^{+,θ}（θ は反アトラクター側）

    γ(v) が単純表現の倍数 k·s_i なら θ によらない値 Ω = 1 (k = 1), 0 (k ≥ 2) を返す。

    Raises:
        HypothesisError: 傾きが (−1, 0] にない、または γ(v) ∈ ker ω_Q
        DomainError: γ(v) が負の成分を持つ
    """
    from .presets import local_p2_preset

    image = gamma_of_chern(v)
    r, d, _ = image.v
    if r <= 0:
        raise HypothesisError(f"v = {image.v} must have positive rank for μ = d/r", SLOPE_CONDITION)
    if not (-r < d <= 0):
        raise HypothesisError(f"v = {image.v} has slope μ = {Fraction(d, r)}", SLOPE_CONDITION)
    if not image.effective:
        raise DomainError(f"γ(v) = {image.gamma} has a negative entry; no shift convention is applied")
    preset = preset or local_p2_preset()
    quiver, seed, psi = preset.quiver, preset.seed, preset.psi
    gamma = image.gamma
    if quiver.in_kernel(gamma):
        raise HypothesisError(f"γ(v) = {gamma} lies in ker ω_Q", KERNEL_CONDITION)
    x = tuple(Fraction(-c) for c in seed.m_of(_multiplicities(quiver, gamma)))
    theta = psi.dual(x)
    support = [i for i, c in enumerate(gamma) if c]
    if len(support) == 1:
        i = support[0]
        gamma0 = quiver.simple(i).coords
        k = gamma[i]
        ints = {j: Fraction(1 if j == 1 else 0) for j in range(1, k + 1)}
        bars = rational_from_integer(ints, gamma0, quadratic_sign(quiver, gamma0))
        record = DTRecord(gamma, theta, bars[k], ints[k], "theta-independent", bars, ints, route="simple")
    else:
        record = dt_via_seed(preset, gamma, theta, order, engine=engine)
    logger.info(f"local P^2: Ω_v = {record.omega} for v = {image.v} (γ(v) = {gamma})")
    return record
