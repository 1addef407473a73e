import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from src.errors import DimensionError, DomainError, HypothesisError
from src.generator import ANTI_ATTRACTOR, SampleGenerator, chamber_note, enumerate_chambers
from src.lattice import (
    Quiver,
    Side,
    divisibility,
    is_gamma_general,
    iter_dimension_vectors,
    primitive,
    quadratic_sign,
)
from src.scattering import Cone, DiagramContext, ScatteringDiagram, Wall, WallTag, chamber_function
from src.series import SeriesContext, TruncatedSeries, coefficients_along, exp, log
from .base_module import BaseModule

logger = logging.getLogger(__name__)

KERNEL_CONDITION = "γ ∉ ker ω_Q"
TRIVIAL_ATTRACTOR_CONDITION = "attractor invariants not asserted trivial"


class QuiverDT(BaseModule):
    """
    クイバー側の DT 辞書
    初期クラスター図式を補完し、壁関数と DT 不変量を相互に変換します。
    """

    def __init__(self, quiver: Quiver, name: Optional[str] = None):
        self.quiver = quiver
        super().__init__(name or f"QuiverDT[{quiver.name}]")

    def initial_diagram(self) -> ScatteringDiagram:
        return initial_cluster_diagram(self.quiver)

    def dt(self, gamma: Sequence[int], theta: Sequence, order: Optional[int] = None) -> "DTRecord":
        return dt_invariants(self.quiver, gamma, theta, order or self.get_parameter("order"), engine=self)

    def audit(self, bound: int, sample_size: Optional[int] = None) -> "AuditReport":
        return positivity_audit(
            self.quiver,
            bound,
            sample_size or self.get_parameter("sample_size"),
            seed=self.get_parameter("sample_seed"),
            engine=self,
        )


# --- 図式 ---


def quiver_context(quiver: Quiver) -> DiagramContext:
    return DiagramContext(Side.QUIVER, quiver.vertex_count, 0, quiver.skew_matrix, (), quiver.name)


def _require_trivial_attractor(quiver: Quiver) -> None:
    if not quiver.trivial_attractor:
        raise HypothesisError(f"Quiver {quiver.name}: {TRIVIAL_ATTRACTOR_CONDITION}", TRIVIAL_ATTRACTOR_CONDITION)


def initial_cluster_diagram(quiver: Quiver, order: int = 1) -> ScatteringDiagram:
    """
    初期クラスター図式 {(s_i^⊥, 1 + z^{s_i}) : i ∈ I}

    Raises:
        HypothesisError: アトラクター不変量の自明性が表明されていない
    """
    _require_trivial_attractor(quiver)
    context = quiver_context(quiver)
    series_ctx = context.series_context
    walls = []
    for i in quiver.index_set:
        simple = quiver.simple(i).coords
        f = TruncatedSeries(series_ctx, order, {series_ctx.zero(): 1, simple: 1})
        walls.append(Wall(Cone.hyperplane(simple), simple, f, WallTag.INITIAL, f"s{i + 1}", i))
    return ScatteringDiagram(context, tuple(walls), order)


# --- 有理 DT 不変量と整数 DT 不変量 ---


def _check_primitive(gamma0: Sequence[int]) -> None:
    if divisibility(gamma0) != 1:
        raise DomainError(f"γ0 = {tuple(gamma0)} must be primitive")


def _coefficient(k: int, j: int, sign: Optional[int]) -> Fraction:
    if sign is None:
        return Fraction((-1) ** (j - 1), j * j)
    return Fraction((sign**k) ** (j + 1), j * j)


def rational_from_integer(
    omega: Mapping[int, object], gamma0: Sequence[int], sign: Optional[int] = None
) -> Dict[int, Fraction]:
    """
    Ω̄_{nγ0} = Σ_{kj=n} (−1)^{j−1}/j² · Ω_{kγ0}

    Args:
        omega: k → Ω_{kγ0}
        gamma0: 原始的な次元ベクトル
        sign: 二次の精密化 σ(γ0)。与えると係数は σ(kγ0)^{j+1}/j² になる
    """
    _check_primitive(gamma0)
    top = max(omega, default=0)
    out: Dict[int, Fraction] = {}
    for n in range(1, top + 1):
        total = Fraction(0)
        for k in range(1, n + 1):
            if n % k == 0 and omega.get(k):
                total += _coefficient(k, n // k, sign) * Fraction(omega[k])
        out[n] = total
    return out


def integer_from_rational(
    omega_bar: Mapping[int, object], gamma0: Sequence[int], sign: Optional[int] = None
) -> Dict[int, Fraction]:
    """rational_from_integer の三角系を厳密に解く"""
    _check_primitive(gamma0)
    top = max(omega_bar, default=0)
    out: Dict[int, Fraction] = {}
    for n in range(1, top + 1):
        rest = Fraction(omega_bar.get(n, 0))
        for k in range(1, n):
            if n % k == 0:
                rest -= _coefficient(k, n // k, sign) * out[k]
        out[n] = rest / _coefficient(n, 1, sign)
    return out


def assemble_wall_function(
    omega_bar: Mapping[int, object], gamma0: Sequence[int], context: SeriesContext, order: int
) -> TruncatedSeries:
    """exp(Σ_k k·Ω̄_{kγ0} z^{kγ0})"""
    _check_primitive(gamma0)
    terms = {}
    for k, value in omega_bar.items():
        if value:
            terms[tuple(k * c for c in gamma0)] = k * Fraction(value)
    return exp(TruncatedSeries(context, order, terms))


def extract_dt(f: TruncatedSeries, gamma0: Sequence[int]) -> Dict[int, Fraction]:
    """
    Ω̄_{kγ0} = (log f の z^{kγ0} の係数) / k

    Raises:
        DomainError: f が z^{γ0} の冪以外の項を持つ
    """
    _check_primitive(gamma0)
    coefficients = coefficients_along(log(f), gamma0)
    return {k: c / k for k, c in sorted(coefficients.items())}


# --- DT レコード ---


@dataclass
class DTRecord:
    """
    DT 不変量の記録

    omega_bar / omega は γ 自身の値、multiples は γ0 の倍数ごとの値。
    """

    gamma: tuple
    theta: tuple
    omega_bar: Fraction
    omega: Fraction
    chamber_note: str
    multiples_bar: Dict[int, Fraction] = field(default_factory=dict)
    multiples: Dict[int, Fraction] = field(default_factory=dict)
    route: str = "quiver"

    @property
    def is_integral(self) -> bool:
        return self.omega.denominator == 1

    def to_dict(self) -> Dict[str, object]:
        return {
            "gamma": list(self.gamma),
            "theta": [str(c) for c in self.theta],
            "omega_bar": str(self.omega_bar),
            "omega": str(self.omega),
            "chamber": self.chamber_note,
            "route": self.route,
            "multiples": {str(k): {"omega_bar": str(self.multiples_bar[k]), "omega": str(self.multiples[k])} for k in sorted(self.multiples)},
        }


def _validate_query(quiver: Quiver, gamma: Sequence[int], theta: Sequence, order: int, check_general: bool = True) -> tuple:
    _require_trivial_attractor(quiver)
    gamma = tuple(int(c) for c in gamma)
    if len(gamma) != quiver.vertex_count:
        raise DimensionError(f"Dimension vector {gamma} has length {len(gamma)}, expected {quiver.vertex_count}")
    if any(c < 0 for c in gamma) or not any(gamma):
        raise DomainError(f"{gamma} is not in N_Q^+")
    if quiver.in_kernel(gamma):
        raise HypothesisError(
            f"{gamma} lies in ker ω_Q; such invariants do not depend on θ and do not play a role in any wall-crossing",
            KERNEL_CONDITION,
        )
    if order < sum(gamma):
        raise DomainError(f"Order {order} is below the total degree {sum(gamma)} of {gamma}")
    theta = tuple(Fraction(c) for c in theta)
    if check_general and not is_gamma_general(quiver, theta, gamma, order):
        raise DomainError(f"θ = {theta} is not {gamma}-general up to degree {order}")
    return gamma, theta


def record_from_function(
    quiver: Quiver, gamma: tuple, theta: tuple, f: TruncatedSeries, order: int, route: str = "quiver"
) -> DTRecord:
    """部屋関数から γ の DT レコードを作る"""
    gamma0, k = primitive(gamma)
    sign = quadratic_sign(quiver, gamma0)
    bars = extract_dt(f, gamma0)
    top = order // sum(gamma0)
    bars = {m: bars.get(m, Fraction(0)) for m in range(1, top + 1)}
    ints = integer_from_rational(bars, gamma0, sign)
    note = chamber_note(quiver, gamma, theta, order)
    return DTRecord(gamma, theta, bars[k], ints[k], note, bars, ints, route)


def dt_invariants(
    quiver: Quiver,
    gamma: Sequence[int],
    theta: Sequence,
    order: int,
    experimental: bool = False,
    preset=None,
    engine: Optional[QuiverDT] = None,
) -> DTRecord:
    """
    Ω̄_γ^{+,θ} と Ω_γ^{+,θ}

    階数2ではクラスター図式の補完から読む。階数3では experimental なら実験的な
    補完から、そうでなく preset が与えられればシード側の経路から読む。

    Raises:
        HypothesisError: 仮定が満たされない（γ ∈ ker ω_Q など）
        DomainError: θ が一般でない
    """
    seed_route = quiver.vertex_count > 2 and not experimental
    gamma, theta = _validate_query(quiver, gamma, theta, order, check_general=not seed_route)
    if seed_route:
        if preset is None:
            raise DomainError(
                f"{quiver.name} has {quiver.vertex_count} vertices; pass a preset for the seed-side route "
                "or enable experimental completion"
            )
        from .correspondence import dt_via_seed

        return dt_via_seed(preset, gamma, theta, order)
    if engine is None:
        engine = QuiverDT(quiver)
    if experimental:
        engine.set_parameter("experimental", True)
    diagram = engine.process(order)
    f = chamber_function(diagram, theta)
    record = record_from_function(quiver, gamma, theta, f, order)
    logger.info(f"{quiver.name}: Ω{gamma} = {record.omega} at θ = {theta} ({record.chamber_note})")
    return record


# --- 正値性の監査 ---


@dataclass
class AuditReport:
    """正値性監査の結果"""

    quiver: str
    bound: int
    checked: int = 0
    violations: List[Dict[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, object]:
        return {"quiver": self.quiver, "bound": self.bound, "checked": self.checked, "ok": self.ok, "violations": self.violations}


def positivity_audit(
    quiver: Quiver, bound: int, sample_size: int = 4, seed: int = 0, engine: Optional[QuiverDT] = None
) -> AuditReport:
    """
    次数 bound までの各 γ ∉ ker ω_Q と、抽出した一般の θ で Ω ∈ ℤ_{≥0} を確かめる

    違反は例外ではなく報告に載せる。
    """
    _require_trivial_attractor(quiver)
    engine = engine or QuiverDT(quiver)
    generator = SampleGenerator(seed)
    diagram = engine.process(bound)
    report = AuditReport(quiver.name, bound)
    for gamma in iter_dimension_vectors(quiver.vertex_count, bound):
        if quiver.in_kernel(gamma):
            continue
        chambers = enumerate_chambers(quiver, gamma, bound)
        if len(chambers) > sample_size:
            picks = sorted(int(i) for i in generator.rng.choice(len(chambers), size=sample_size, replace=False))
            chambers = [chambers[i] for i in picks]
        for chamber in chambers:
            record = record_from_function(quiver, gamma, chamber.theta, chamber_function(diagram, chamber.theta), bound)
            report.checked += 1
            if not record.is_integral or record.omega < 0:
                report.violations.append(record.to_dict())
                logger.warning(f"{quiver.name}: Ω{gamma} = {record.omega} at {chamber.theta} is not a non-negative integer")
    logger.info(f"{quiver.name}: positivity audit up to degree {bound}: {report.checked} checks, {len(report.violations)} violations")
    return report


def simple_wall_function(quiver: Quiver, i: int, order: int, engine: Optional[QuiverDT] = None) -> TruncatedSeries:
    """s_i^⊥ 上の一般の点での部屋関数"""
    engine = engine or QuiverDT(quiver)
    generator = SampleGenerator(0)
    simple = quiver.simple(i).coords
    if quiver.vertex_count > 2:
        raise DimensionError("simple_wall_function reads the completed diagram and needs two vertices")
    point = generator.chamber_point(quiver, simple, ANTI_ATTRACTOR, order).theta
    return chamber_function(engine.process(order), point)

