"""
格子・歪形式・クイバー・シードと、それらの妥当性検査

クイバー側 (N_Q, M_Q) とシード側 (N, M) のベクトルは同じ整数タプル表現を共有するが、
DimensionVector / Covector に Side タグを付け、異なる文脈どうしのペアリングを拒否する。
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property, cmp_to_key
from math import gcd
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import sympy

from src.errors import DimensionError, DomainError

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]
RationalVector = Tuple[Fraction, ...]


class Side(Enum):
    """格子の文脈"""

    QUIVER = "quiver"  # N_Q と M_Q
    SEED = "seed"  # N と M


# --- 整数ベクトルの補助関数 ---


def divisibility(vec: Sequence[int]) -> int:
    """非零成分の gcd（零ベクトルなら 0）"""
    d = 0
    for c in vec:
        d = gcd(d, int(c))
    return d


def primitive(vec: Sequence[int]) -> Tuple[IntVector, int]:
    """
    原始ベクトルと可除性に分解する

    Returns:
        (vec / |vec|, |vec|)
    """
    d = divisibility(vec)
    if d == 0:
        raise DomainError("Zero vector has no primitive part")
    return tuple(int(c) // d for c in vec), d


def primitive_rational(vec: Sequence[Fraction]) -> IntVector:
    """有理ベクトルと同じ向きの原始整数ベクトル"""
    fracs = [Fraction(c) for c in vec]
    if all(c == 0 for c in fracs):
        raise DomainError("Zero vector has no primitive direction")
    lcm = 1
    for c in fracs:
        lcm = lcm * c.denominator // gcd(lcm, c.denominator)
    return primitive([int(c * lcm) for c in fracs])[0]


def dot(a: Sequence, b: Sequence):
    if len(a) != len(b):
        raise DimensionError(f"Length mismatch in pairing: {len(a)} vs {len(b)}")
    return sum(x * y for x, y in zip(a, b))


def cross2(u: Sequence, w: Sequence):
    """2次元の外積 det(u, w)"""
    return u[0] * w[1] - u[1] * w[0]


def rot90(u: Sequence) -> tuple:
    """反時計回りに90度回転"""
    return (-u[1], u[0])


def _half(u: Sequence) -> int:
    return 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1


def ccw_compare(u: Sequence, w: Sequence) -> int:
    """正の x 軸から測った偏角で比較する（厳密演算）"""
    hu, hw = _half(u), _half(w)
    if hu != hw:
        return -1 if hu < hw else 1
    c = cross2(u, w)
    if c > 0:
        return -1
    if c < 0:
        return 1
    return 0


def sort_ccw(vectors: Sequence[Sequence]) -> List[tuple]:
    return sorted((tuple(v) for v in vectors), key=cmp_to_key(ccw_compare))


def same_ray(u: Sequence, w: Sequence) -> bool:
    """u, w が同じ半直線を張るか"""
    return cross2(u, w) == 0 and dot(u, w) > 0


def iter_dimension_vectors(rank: int, max_degree: int, min_degree: int = 1) -> Iterator[IntVector]:
    """総次数が min_degree 以上 max_degree 以下の N^⊕ の元を次数順に列挙"""
    for degree in range(max(min_degree, 0), max_degree + 1):
        for cut in itertools.combinations(range(degree + rank - 1), rank - 1):
            prev = -1
            parts = []
            for c in cut:
                parts.append(c - prev - 1)
                prev = c
            parts.append(degree + rank - 1 - prev - 1)
            yield tuple(parts)


def _to_fraction(value) -> Fraction:
    """sympy の有理数を Fraction に変換"""
    rational = sympy.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


def _coords(x) -> tuple:
    if isinstance(x, (DimensionVector, Covector)):
        return x.coords
    return tuple(x)


# --- 型の定義 ---


@dataclass(frozen=True)
class DimensionVector:
    """N_Q（またはシードの N）の格子点"""

    coords: IntVector
    side: Side = Side.QUIVER

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    @property
    def total_degree(self) -> int:
        return sum(self.coords)

    @property
    def divisibility(self) -> int:
        return divisibility(self.coords)

    def is_positive(self) -> bool:
        """N^+ に属するか（全成分非負かつ非零）"""
        return all(c >= 0 for c in self.coords) and any(c != 0 for c in self.coords)

    def primitive(self) -> Tuple["DimensionVector", int]:
        prim, d = primitive(self.coords)
        return DimensionVector(prim, self.side), d

    def __str__(self):
        return f"({', '.join(str(c) for c in self.coords)})"


@dataclass(frozen=True)
class Covector:
    """M_Q,R（または M_R）の有理点"""

    coords: RationalVector
    side: Side = Side.QUIVER

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    def pair(self, gamma: DimensionVector) -> Fraction:
        """
        次元ベクトルとのペアリング

        Args:
            gamma: 同じ文脈の次元ベクトル

        Returns:
            θ(γ)
        """
        if isinstance(gamma, DimensionVector) and gamma.side != self.side:
            raise DimensionError(f"Cannot pair a {self.side.value} covector with a {gamma.side.value} vector")
        return dot(self.coords, _coords(gamma))

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __str__(self):
        return f"({', '.join(str(c) for c in self.coords)})"


@dataclass(frozen=True)
class Quiver:
    """
    クイバー（頂点数と矢の本数の行列）

    arrow_counts[i][j] は i から j への矢の本数。trivial_attractor は
    アトラクター不変量が自明であるという仮定を入力として表明するフラグ。
    """

    vertex_count: int
    arrow_counts: Tuple[Tuple[int, ...], ...]
    trivial_attractor: bool = False
    name: str = "quiver"
    citation: str = ""

    def __post_init__(self):
        if self.vertex_count < 1:
            raise DimensionError(f"Quiver {self.name} needs at least one vertex, got {self.vertex_count}")
        rows = tuple(tuple(int(a) for a in row) for row in self.arrow_counts)
        if len(rows) != self.vertex_count or any(len(row) != self.vertex_count for row in rows):
            raise DimensionError(f"arrow_counts of {self.name} must be {self.vertex_count}x{self.vertex_count}")
        if any(a < 0 for row in rows for a in row):
            raise DomainError(f"arrow_counts of {self.name} must be non-negative")
        object.__setattr__(self, "arrow_counts", rows)

    @classmethod
    def from_arrows(cls, vertex_count: int, arrows: Sequence[Tuple[int, int, int]], **kwargs) -> "Quiver":
        """
        (from, to, count) の三つ組からクイバーを作る（頂点は0始まり）
        """
        counts = [[0] * vertex_count for _ in range(vertex_count)]
        for source, target, count in arrows:
            if not (0 <= source < vertex_count and 0 <= target < vertex_count):
                raise DimensionError(f"Arrow ({source}, {target}) out of range for {vertex_count} vertices")
            counts[source][target] += count
        return cls(vertex_count, tuple(tuple(r) for r in counts), **kwargs)

    @classmethod
    def kronecker(cls, m: int, trivial_attractor: bool = True) -> "Quiver":
        """m 本の矢 1→2 を持つクロネッカー・クイバー"""
        return cls.from_arrows(
            2, [(0, 1, m)], trivial_attractor=trivial_attractor, name=f"kronecker{m}", citation="acyclic quiver"
        )

    @cached_property
    def skew_matrix(self) -> Tuple[Tuple[int, ...], ...]:
        """ω_ij = a_ij − a_ji"""
        a = np.array(self.arrow_counts, dtype=np.int64)
        return tuple(tuple(int(x) for x in row) for row in (a - a.T))

    @cached_property
    def index_set(self) -> Tuple[int, ...]:
        """I = {i : ι_{s_i}ω_Q ≠ 0}"""
        return tuple(i for i, row in enumerate(self.skew_matrix) if any(row))

    @property
    def rank(self) -> int:
        return self.vertex_count

    def simple(self, i: int) -> DimensionVector:
        coords = [0] * self.vertex_count
        coords[i] = 1
        return DimensionVector(tuple(coords))

    def in_kernel(self, gamma) -> bool:
        return all(c == 0 for c in attractor_point(self, gamma, allow_zero=True).coords)

    def __str__(self):
        return f"Quiver({self.name}, vertices={self.vertex_count})"


@dataclass(frozen=True)
class SymplecticSeed:
    """
    シンプレクティック・シード (N, (e_i), ω) と M_R の2次元完備扇

    fan_rays は反時計回りに並べた原始整数ベクトル。
    """

    rank: int
    e_vectors: Tuple[Tuple[int, ...], ...]
    omega: Tuple[Tuple[int, ...], ...]
    fan_rays: Tuple[Tuple[int, ...], ...] = ()
    name: str = "seed"

    def __post_init__(self):
        object.__setattr__(self, "e_vectors", tuple(tuple(int(c) for c in e) for e in self.e_vectors))
        object.__setattr__(self, "omega", tuple(tuple(int(c) for c in row) for row in self.omega))
        object.__setattr__(self, "fan_rays", tuple(tuple(int(c) for c in r) for r in self.fan_rays))
        if len(self.omega) != self.rank or any(len(row) != self.rank for row in self.omega):
            raise DimensionError(f"omega of {self.name} must be {self.rank}x{self.rank}")
        for e in self.e_vectors:
            if len(e) != self.rank:
                raise DimensionError(f"e-vector {e} of {self.name} has length {len(e)}, expected {self.rank}")

    @property
    def index_set(self) -> Tuple[int, ...]:
        return tuple(range(len(self.e_vectors)))

    def iota(self, n: Sequence[int]) -> IntVector:
        """ι_n ω = ω(n, −) を M の座標で返す"""
        if len(n) != self.rank:
            raise DimensionError(f"Vector {tuple(n)} has length {len(n)}, expected {self.rank}")
        return tuple(sum(n[i] * self.omega[i][k] for i in range(self.rank)) for k in range(self.rank))

    @cached_property
    def v_vectors(self) -> Tuple[IntVector, ...]:
        """v_i = ι_{e_i} ω"""
        return tuple(self.iota(e) for e in self.e_vectors)

    def m_of(self, A: Sequence[int]) -> IntVector:
        """Σ a_i v_i"""
        if len(A) != len(self.e_vectors):
            raise DimensionError(f"Multiplicity vector {tuple(A)} has length {len(A)}, expected {len(self.e_vectors)}")
        return tuple(sum(a * v[k] for a, v in zip(A, self.v_vectors)) for k in range(self.rank))

    def __str__(self):
        return f"SymplecticSeed({self.name}, rank={self.rank}, |I|={len(self.e_vectors)})"


@dataclass(frozen=True)
class CompatibilityMap:
    """
    格子写像 ψ: N_Q → N

    matrix は (シードの階数) × (頂点数) の整数行列で、第 i 列が ψ(s_i)。
    """

    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(c) for c in row) for row in self.matrix)
        if not rows or len({len(r) for r in rows}) != 1:
            raise DimensionError("psi must be a non-empty rectangular matrix")
        object.__setattr__(self, "matrix", rows)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]]) -> "CompatibilityMap":
        columns = [tuple(c) for c in columns]
        return cls(tuple(tuple(col[k] for col in columns) for k in range(len(columns[0]))))

    @property
    def source_rank(self) -> int:
        return len(self.matrix[0])

    @property
    def target_rank(self) -> int:
        return len(self.matrix)

    def column(self, i: int) -> IntVector:
        return tuple(row[i] for row in self.matrix)

    def apply(self, gamma) -> IntVector:
        """ψ(γ)"""
        g = _coords(gamma)
        if len(g) != self.source_rank:
            raise DimensionError(f"psi expects vectors of length {self.source_rank}, got {len(g)}")
        return tuple(sum(row[i] * g[i] for i in range(len(g))) for row in self.matrix)

    def dual(self, x: Sequence) -> RationalVector:
        """ψ∨(x) = x∘ψ ∈ M_Q,R"""
        x = _coords(x)
        if len(x) != self.target_rank:
            raise DimensionError(f"psi dual expects points of length {self.target_rank}, got {len(x)}")
        return tuple(Fraction(sum(self.matrix[k][i] * Fraction(x[k]) for k in range(len(x)))) for i in range(self.source_rank))

    def dual_preimage(self, theta: Sequence) -> Optional[RationalVector]:
        """
        ψ∨(x) = θ を満たす x を解く

        Returns:
            解（ψ∨ の像に入っていなければ None）
        """
        theta = [Fraction(c) for c in _coords(theta)]
        if len(theta) != self.source_rank:
            raise DimensionError(f"theta must have length {self.source_rank}, got {len(theta)}")
        psi_t = sympy.Matrix(self.matrix).T
        rhs = sympy.Matrix([sympy.Rational(c.numerator, c.denominator) for c in theta])
        try:
            solution, params = psi_t.gauss_jordan_solve(rhs)
        except ValueError:
            return None
        # 自由変数が残る場合は 0 を代入する（ψ が有理全射なら起こらない）
        solution = solution.subs({p: 0 for p in params})
        return tuple(_to_fraction(p) for p in solution)

    def image_divisibility(self, gamma) -> int:
        return divisibility(self.apply(gamma))


@dataclass
class ValidationReport:
    """妥当性検査の結果（errors が空なら妥当）"""

    subject: str
    errors: List[str] = field(default_factory=list)
    cokernel_order: Optional[int] = None

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> Dict[str, object]:
        return {"subject": self.subject, "valid": self.ok, "errors": list(self.errors), "cokernel_order": self.cokernel_order}

    def __str__(self):
        if self.ok:
            extra = f", cokernel order {self.cokernel_order}" if self.cokernel_order is not None else ""
            return f"{self.subject}: valid{extra}"
        return f"{self.subject}: invalid ({'; '.join(self.errors)})"


# --- 演算 ---


def skew_form(quiver: Quiver, gamma, gamma_prime) -> int:
    """
    ω_Q(γ, γ') = Σ (a_ij − a_ji) γ_i γ'_j

    Args:
        quiver: クイバー
        gamma: 次元ベクトル
        gamma_prime: 次元ベクトル
    """
    g, h = _coords(gamma), _coords(gamma_prime)
    n = quiver.vertex_count
    if len(g) != n or len(h) != n:
        raise DimensionError(f"Dimension vectors for {quiver.name} must have length {n}, got {len(g)} and {len(h)}")
    w = quiver.skew_matrix
    return sum(w[i][j] * g[i] * h[j] for i in range(n) if g[i] for j in range(n) if h[j])


def attractor_point(quiver: Quiver, gamma, allow_zero: bool = False) -> Covector:
    """
    アトラクター点 ι_γ ω_Q = ω_Q(γ, −)

    Args:
        quiver: クイバー
        gamma: 零でない次元ベクトル
    """
    g = _coords(gamma)
    if len(g) != quiver.vertex_count:
        raise DimensionError(f"Dimension vector for {quiver.name} must have length {quiver.vertex_count}, got {len(g)}")
    if not allow_zero and all(c == 0 for c in g):
        raise DomainError("attractor_point needs a nonzero dimension vector")
    w = quiver.skew_matrix
    n = quiver.vertex_count
    return Covector(tuple(sum(g[i] * w[i][j] for i in range(n)) for j in range(n)))


def is_gamma_general(quiver: Quiver, theta, gamma, bound: int) -> bool:
    """
    θ が次数 bound までで γ-一般か

    θ(γ') = 0 となる γ' ∈ N_Q^+（総次数 ≤ bound）が γ と共線なものに限られるとき真。
    判定は bound に相対的である。
    """
    t = tuple(Fraction(c) for c in _coords(theta))
    g = _coords(gamma)
    if dot(t, g) != 0:
        raise DomainError(f"is_gamma_general requires theta(gamma) = 0, got {dot(t, g)}")
    prim_g = primitive(g)[0]
    for candidate in iter_dimension_vectors(quiver.vertex_count, bound):
        if dot(t, candidate) != 0:
            continue
        if primitive(candidate)[0] != prim_g:
            logger.debug(f"theta {t} is not general for {g}: vanishes on {candidate}")
            return False
    return True


def quadratic_sign(quiver: Quiver, gamma) -> int:
    """
    二次の精密化 σ(γ) = (−1)^{Σγ_i + Σ_{i<j} ω_ij γ_i γ_j}
    """
    g = _coords(gamma)
    w = quiver.skew_matrix
    n = quiver.vertex_count
    q = sum(g) + sum(w[i][j] * g[i] * g[j] for i in range(n) for j in range(i + 1, n))
    return -1 if q % 2 else 1


def validate_seed(seed: SymplecticSeed) -> ValidationReport:
    """
    シードの不変条件をすべて検査し、破れているものを列挙する
    """
    report = ValidationReport(subject=f"seed {seed.name}")
    omega = np.array(seed.omega, dtype=np.int64)
    if not np.array_equal(omega, -omega.T):
        report.errors.append("omega is not skew-symmetric")
    if sympy.Matrix(seed.omega).rank() < seed.rank:
        report.errors.append("degenerate skew form")
    for i, v in enumerate(seed.v_vectors):
        d = divisibility(v)
        if d == 0:
            report.errors.append(f"v_{i + 1} = iota_(e_{i + 1}) omega is zero")
        elif d != 1:
            report.errors.append(f"v_{i + 1} = {v} is not primitive (|v_i|={d})")

    if seed.rank != 2:
        report.errors.append(f"fans in dimension {seed.rank} are not supported (only complete 2D fans)")
        return report

    rays = list(seed.fan_rays)
    for r in rays:
        if len(r) != 2 or divisibility(r) != 1:
            report.errors.append(f"fan ray {r} is not a primitive 2D vector")
    if len(set(rays)) != len(rays):
        report.errors.append("fan rays are not pairwise distinct")
    if len(rays) < 3:
        report.errors.append("fan not complete: fewer than three rays")
    elif not report.errors:
        start = rays.index(sort_ccw(rays)[0])
        rotated = rays[start:] + rays[:start]
        if rotated != sort_ccw(rays):
            report.errors.append("fan rays are not listed counterclockwise")
        gaps = [cross2(rays[k], rays[(k + 1) % len(rays)]) for k in range(len(rays))]
        if any(g <= 0 for g in gaps):
            report.errors.append("fan not complete: rays do not positively span the plane")
    for i, v in enumerate(seed.v_vectors):
        if divisibility(v) == 1 and tuple(v) not in rays:
            report.errors.append(f"fan missing the ray through v_{i + 1} = {v}")
    return report


def validate_compatibility(quiver: Quiver, seed: SymplecticSeed, psi: CompatibilityMap) -> ValidationReport:
    """
    ψ が互換データであるかを検査する（ψ(s_i)=e_i、ψ⋆ω=ω_Q、有理全射）

    Returns:
        余核が有限なら cokernel_order を埋めたレポート
    """
    report = ValidationReport(subject=f"compatibility {quiver.name} -> {seed.name}")
    if psi.source_rank != quiver.vertex_count or psi.target_rank != seed.rank:
        report.errors.append(
            f"psi has shape {psi.target_rank}x{psi.source_rank}, expected {seed.rank}x{quiver.vertex_count}"
        )
        return report

    index_set = quiver.index_set
    if len(seed.e_vectors) != len(index_set):
        report.errors.append(f"seed has {len(seed.e_vectors)} e-vectors but I has {len(index_set)} elements")
    else:
        for k, i in enumerate(index_set):
            if psi.column(i) != seed.e_vectors[k]:
                report.errors.append(f"psi(s_{i + 1}) = {psi.column(i)} differs from e_{k + 1} = {seed.e_vectors[k]}")

    p = np.array(psi.matrix, dtype=np.int64)
    pulled = p.T @ np.array(seed.omega, dtype=np.int64) @ p
    if not np.array_equal(pulled, np.array(quiver.skew_matrix, dtype=np.int64)):
        report.errors.append("ψ⋆ω ≠ ω_Q")

    matrix = sympy.Matrix(psi.matrix)
    if matrix.rank() < seed.rank:
        report.errors.append("psi is not surjective over the rationals (infinite cokernel)")
    else:
        # 余核の位数 = 極大小行列式の gcd
        order = 0
        for cols in itertools.combinations(range(psi.source_rank), seed.rank):
            order = gcd(order, int(matrix.extract(list(range(seed.rank)), list(cols)).det()))
        report.cokernel_order = abs(order)
    return report
