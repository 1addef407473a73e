"""
有理数係数の切断冪級数と壁越え自己同型の作用

指数はタプルで表す。クイバー側は γ ∈ N_Q^⊕ そのもの、シード側は
(m の成分..., A の成分...) を連結したもの。次数はクイバー側では座標和、
シード側では t 部分の和。
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from src.errors import DimensionError, DomainError, SeriesContextError
from src.lattice import Side

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


@dataclass(frozen=True)
class SeriesContext:
    """指数の文脈（どちら側か、格子の階数、t 変数の個数）"""

    side: Side
    lattice_rank: int
    t_count: int = 0

    @property
    def width(self) -> int:
        return self.lattice_rank + self.t_count

    def degree(self, exponent: Exponent) -> int:
        if self.side is Side.QUIVER:
            return sum(exponent)
        return sum(exponent[self.lattice_rank :])

    def zero(self) -> Exponent:
        return (0,) * self.width

    def make(self, lattice_part: Sequence[int], t_part: Sequence[int] = ()) -> Exponent:
        if len(lattice_part) != self.lattice_rank:
            raise DimensionError(f"Lattice part {tuple(lattice_part)} must have length {self.lattice_rank}")
        t_part = tuple(t_part) if t_part else (0,) * self.t_count
        if len(t_part) != self.t_count:
            raise DimensionError(f"t part {t_part} must have length {self.t_count}")
        return tuple(int(c) for c in lattice_part) + tuple(int(c) for c in t_part)

    def lattice_part(self, exponent: Exponent) -> Tuple[int, ...]:
        return exponent[: self.lattice_rank]

    def t_part(self, exponent: Exponent) -> Tuple[int, ...]:
        return exponent[self.lattice_rank :]

    def check(self, exponent: Exponent) -> None:
        if len(exponent) != self.width:
            raise DimensionError(f"Exponent {exponent} has length {len(exponent)}, expected {self.width}")
        if self.side is Side.QUIVER and any(c < 0 for c in exponent):
            raise DomainError(f"Quiver-side exponent {exponent} has a negative entry")
        if self.side is Side.SEED and any(c < 0 for c in exponent[self.lattice_rank :]):
            raise DomainError(f"t exponents of {exponent} must be non-negative")

    def to_dict(self) -> Dict[str, object]:
        return {"side": self.side.value, "lattice_rank": self.lattice_rank, "t_count": self.t_count}


def _add(e1: Exponent, e2: Exponent) -> Exponent:
    return tuple(a + b for a, b in zip(e1, e2))


class TruncatedSeries:
    """
    切断冪級数

    terms は指数 → Fraction の疎な辞書で、零係数と order を超える次数の項は持たない。
    値は不変として扱う（構築後に terms を書き換えない）。
    """

    __slots__ = ("context", "order", "terms")

    def __init__(self, context: SeriesContext, order: int, terms: Optional[Mapping[Exponent, object]] = None):
        if order < 0:
            raise DomainError(f"Truncation order must be non-negative, got {order}")
        clean: Dict[Exponent, Fraction] = {}
        for exponent, coeff in (terms or {}).items():
            exponent = tuple(int(c) for c in exponent)
            context.check(exponent)
            coeff = Fraction(coeff)
            if coeff and context.degree(exponent) <= order:
                clean[exponent] = clean.get(exponent, Fraction(0)) + coeff
        self.context = context
        self.order = order
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def _raw(cls, context: SeriesContext, order: int, terms: Dict[Exponent, Fraction]) -> "TruncatedSeries":
        """検査を省いた内部用コンストラクタ（terms は正規形であること）"""
        obj = cls.__new__(cls)
        obj.context = context
        obj.order = order
        obj.terms = terms
        return obj

    @classmethod
    def one(cls, context: SeriesContext, order: int) -> "TruncatedSeries":
        return cls._raw(context, order, {context.zero(): Fraction(1)})

    @classmethod
    def zero(cls, context: SeriesContext, order: int) -> "TruncatedSeries":
        return cls._raw(context, order, {})

    @classmethod
    def monomial(cls, context: SeriesContext, order: int, exponent: Sequence[int], coeff=1) -> "TruncatedSeries":
        return cls(context, order, {tuple(exponent): coeff})

    # --- 基本的な問い合わせ ---

    @property
    def constant_term(self) -> Fraction:
        return self.terms.get(self.context.zero(), Fraction(0))

    def degree_part(self, degree: int) -> Dict[Exponent, Fraction]:
        deg = self.context.degree
        return {e: c for e, c in self.terms.items() if deg(e) == degree}

    def is_unit_series(self) -> bool:
        """次数 0 の部分がちょうど定数 1 か"""
        return self.degree_part(0) == {self.context.zero(): Fraction(1)}

    def is_one(self) -> bool:
        return self.terms == {self.context.zero(): Fraction(1)}

    def min_positive_degree(self) -> Optional[int]:
        degrees = [self.context.degree(e) for e in self.terms if self.context.degree(e) > 0]
        return min(degrees) if degrees else None

    def items(self) -> List[Tuple[Exponent, Fraction]]:
        return sorted(self.terms.items())

    def truncate(self, order: int) -> "TruncatedSeries":
        return self.with_order(order)

    def with_order(self, order: int) -> "TruncatedSeries":
        """
        保持している項はそのままで打ち切り次数だけを変える

        次数を上げても情報は増えないので、呼び出し側が正しさに責任を持つ。
        """
        deg = self.context.degree
        return TruncatedSeries._raw(self.context, order, {e: c for e, c in self.terms.items() if deg(e) <= order})

    def map_exponents(self, fn: Callable[[Exponent], Exponent], context: SeriesContext, order: Optional[int] = None) -> "TruncatedSeries":
        """指数を付け替えた級数（単項式の代入）"""
        order = self.order if order is None else order
        return TruncatedSeries(context, order, {fn(e): c for e, c in self.terms.items()})

    # --- 演算子 ---

    def _check(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise TypeError(f"Expected TruncatedSeries, got {type(other).__name__}")
        if other.context != self.context:
            raise SeriesContextError(f"Series contexts differ: {self.context} vs {other.context}")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check(other)
        order = min(self.order, other.order)
        deg = self.context.degree
        out = {e: c for e, c in self.terms.items() if deg(e) <= order}
        for e, c in other.terms.items():
            if deg(e) <= order:
                out[e] = out.get(e, Fraction(0)) + c
        return TruncatedSeries._raw(self.context, order, {e: c for e, c in out.items() if c})

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries._raw(self.context, self.order, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def scale(self, factor) -> "TruncatedSeries":
        factor = Fraction(factor)
        if not factor:
            return TruncatedSeries.zero(self.context, self.order)
        return TruncatedSeries._raw(self.context, self.order, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return mul(self, other)

    def __pow__(self, n: int) -> "TruncatedSeries":
        return int_pow(self, n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.context == other.context and self.order == other.order and self.terms == other.terms

    __hash__ = None

    def agrees_with(self, other: "TruncatedSeries", order: Optional[int] = None) -> bool:
        """共通の打ち切り次数（または指定次数）まで一致するか"""
        self._check(other)
        order = min(self.order, other.order) if order is None else order
        return self.truncate(order).terms == other.truncate(order).terms

    def __repr__(self):
        if not self.terms:
            return f"0 + O({self.order + 1})"
        parts = []
        for e, c in self.items():
            if e == self.context.zero():
                parts.append(str(c))
            else:
                parts.append(f"{c}*z^{e}")
        return " + ".join(parts) + f" + O({self.order + 1})"

    # --- 直列化 ---

    def to_json(self) -> Dict[str, object]:
        """辞書順に並べた安定な JSON 形式"""
        r = self.context.lattice_rank
        terms = [[list(e[:r]), list(e[r:]), c.numerator, c.denominator] for e, c in self.items()]
        return {"context": self.context.to_dict(), "order": self.order, "terms": terms}

    @classmethod
    def from_json(cls, data: Mapping[str, object]) -> "TruncatedSeries":
        ctx = data["context"]
        context = SeriesContext(Side(ctx["side"]), int(ctx["lattice_rank"]), int(ctx.get("t_count", 0)))
        terms = {}
        for lattice_part, t_part, num, den in data["terms"]:
            terms[context.make(lattice_part, t_part)] = Fraction(int(num), int(den))
        return cls(context, int(data["order"]), terms)


# --- 演算 ---


def mul(f: TruncatedSeries, g: TruncatedSeries) -> TruncatedSeries:
    """
    積（共通の打ち切り次数で切断）

    Args:
        f: 級数
        g: 同じ文脈の級数
    """
    f._check(g)
    ctx = f.context
    order = min(f.order, g.order)
    deg = ctx.degree
    right = sorted(((e, c, deg(e)) for e, c in g.terms.items()), key=lambda item: item[2])
    out: Dict[Exponent, Fraction] = {}
    for e1, c1 in f.terms.items():
        room = order - deg(e1)
        if room < 0:
            continue
        for e2, c2, d2 in right:
            if d2 > room:
                break
            key = _add(e1, e2)
            out[key] = out.get(key, 0) + c1 * c2
    return TruncatedSeries._raw(ctx, order, {e: c for e, c in out.items() if c})


def inverse(f: TruncatedSeries) -> TruncatedSeries:
    """定数項 1 の級数の逆元"""
    if not f.is_unit_series():
        raise DomainError("Only series whose degree-0 part is exactly 1 are invertible here")
    one = TruncatedSeries.one(f.context, f.order)
    minus_g = one - f
    result = one
    power = one
    for _ in range(f.order):
        power = mul(power, minus_g)
        if not power.terms:
            break
        result = result + power
    return result


def int_pow(f: TruncatedSeries, n: int) -> TruncatedSeries:
    """
    整数冪 f^n（n < 0 のときは定数項 1 が必要）
    """
    n = int(n)
    if n == 0:
        return TruncatedSeries.one(f.context, f.order)
    if n < 0:
        if f.constant_term != 1 or not f.is_unit_series():
            raise DomainError(f"Negative power {n} needs constant term 1, got {f.constant_term}")
        return int_pow(inverse(f), -n)
    result = None
    base = f
    while n:
        if n & 1:
            result = base if result is None else mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


def exp(f: TruncatedSeries) -> TruncatedSeries:
    """exp(f)（定数項 0 が必要）"""
    if f.degree_part(0):
        raise DomainError("exp needs a series without degree-0 terms")
    result = TruncatedSeries.one(f.context, f.order)
    term = result
    for k in range(1, f.order + 1):
        term = mul(term, f).scale(Fraction(1, k))
        if not term.terms:
            break
        result = result + term
    return result


def log(f: TruncatedSeries) -> TruncatedSeries:
    """log(f)（定数項 1 が必要）"""
    if not f.is_unit_series():
        raise DomainError(f"log needs constant term 1, got {f.constant_term}")
    g = f - TruncatedSeries.one(f.context, f.order)
    result = TruncatedSeries.zero(f.context, f.order)
    power = TruncatedSeries.one(f.context, f.order)
    for k in range(1, f.order + 1):
        power = mul(power, g)
        if not power.terms:
            break
        result = result + power.scale(Fraction((-1) ** (k - 1), k))
    return result


def apply_wall_crossing(
    target: TruncatedSeries,
    wall_fn: TruncatedSeries,
    exponent_of: Callable[[Exponent], int],
    power_cache: Optional[Dict[int, TruncatedSeries]] = None,
) -> TruncatedSeries:
    """
    壁越え写像 z^γ ↦ f^{exponent_of(γ)} z^γ を項ごとに適用する

    Args:
        target: 作用させる級数
        wall_fn: 定数項 1 の壁関数
        exponent_of: 指数 → 整数（加法的）
        power_cache: f の冪のキャッシュ（同じ壁を何度も越えるとき用）
    """
    target._check(wall_fn)
    if not wall_fn.is_unit_series():
        raise DomainError("Wall function must have constant term 1")
    order = min(target.order, wall_fn.order)
    wall_fn = wall_fn.truncate(order)
    groups: Dict[int, Dict[Exponent, Fraction]] = {}
    for e, c in target.terms.items():
        groups.setdefault(exponent_of(e), {})[e] = c
    cache = power_cache if power_cache is not None else {}
    result: Dict[Exponent, Fraction] = {}
    for k, group in groups.items():
        piece = TruncatedSeries._raw(target.context, order, group)
        if k != 0:
            power = cache.get(k)
            if power is None or power.order < order:
                power = int_pow(wall_fn, k)
                cache[k] = power
            elif power.order > order:
                power = power.truncate(order)
            piece = mul(piece, power)
        else:
            piece = piece.truncate(order)
        for e, c in piece.terms.items():
            result[e] = result.get(e, 0) + c
    return TruncatedSeries._raw(target.context, order, {e: c for e, c in result.items() if c})


def coefficients_along(f: TruncatedSeries, base: Sequence[int]) -> Dict[int, Fraction]:
    """
    z^{k·base} の係数を取り出す（f が base の冪だけで書けることを確認する）

    Returns:
        k → 係数（k ≥ 1）
    """
    base = tuple(base)
    out: Dict[int, Fraction] = {}
    for e, c in f.terms.items():
        if e == f.context.zero():
            continue
        k = _multiple_of(e, base)
        if k is None:
            raise DomainError(f"Series is not supported on powers of z^{base}: found exponent {e}")
        out[k] = c
    return out


def _multiple_of(e: Exponent, base: Exponent) -> Optional[int]:
    k = None
    for a, b in zip(e, base):
        if b == 0:
            if a != 0:
                return None
            continue
        if a % b:
            return None
        q = a // b
        if k is None:
            k = q
        elif k != q:
            return None
    return k if k is not None and k > 0 else None


def series_from_coefficients(context: SeriesContext, order: int, base: Sequence[int], coeffs: Mapping[int, object]) -> TruncatedSeries:
    """1 + Σ c_k z^{k·base}"""
    terms = {context.zero(): Fraction(1)}
    for k, c in coeffs.items():
        terms[tuple(k * b for b in base)] = Fraction(c)
    return TruncatedSeries(context, order, terms)
