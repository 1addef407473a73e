#!/usr/bin/env python3
"""
テスト用の独立したオラクル（階数2のクイバー側）

src のコードは使わず、級数は {(a, b): Fraction} の辞書、壁は
(半直線 u, 原始的な γ, 壁関数) の三つ組で表す。直線の壁は ±u の2本として渡す。
"""

import math
from fractions import Fraction
from math import gcd


def _deg(e):
    return e[0] + e[1]


def _clean(f):
    return {e: c for e, c in f.items() if c}


def series_mul(f, g, order):
    out = {}
    for e1, c1 in f.items():
        for e2, c2 in g.items():
            e = (e1[0] + e2[0], e1[1] + e2[1])
            if _deg(e) <= order:
                out[e] = out.get(e, 0) + c1 * c2
    return _clean(out)


def series_inverse(f, order):
    """定数項 1 の級数の逆元"""
    assert f.get((0, 0)) == 1
    minus_h = {e: -c for e, c in f.items() if e != (0, 0)}
    result = {(0, 0): Fraction(1)}
    power = {(0, 0): Fraction(1)}
    for _ in range(order):
        power = series_mul(power, minus_h, order)
        if not power:
            break
        for e, c in power.items():
            result[e] = result.get(e, 0) + c
    return _clean(result)


def series_pow(f, k, order):
    if k < 0:
        return series_pow(series_inverse(f, order), -k, order)
    result = {(0, 0): Fraction(1)}
    for _ in range(k):
        result = series_mul(result, f, order)
    return result


def _substitute(g, ratios, order):
    """z^e ↦ z^e R_1^{e_1} R_2^{e_2}"""
    out = {}
    for e, c in g.items():
        image = {e: Fraction(c)}
        for j in range(2):
            if e[j]:
                image = series_mul(image, series_pow(ratios[j], e[j], order), order)
        for e2, c2 in image.items():
            out[e2] = out.get(e2, 0) + c2
    return _clean(out)


def _iota(skew, gamma):
    return tuple(sum(gamma[i] * skew[i][j] for i in range(2)) for j in range(2))


def _angle(u):
    return math.atan2(u[1], u[0]) % (2 * math.pi)


def compose_loop(walls, skew, order):
    """
    原点を反時計回りに一周する経路の合成（最初に越えた壁が最初に作用する）

    速度は半直線 u を90度回した (−u_2, u_1)。壁越えは z^e ↦ z^e f^{s·ω(γ, e)}、
    s = sign⟨γ, 速度⟩。

    Returns:
        z_1, z_2 の像を z_j で割った2つの級数
    """
    ratios = [{(0, 0): Fraction(1)}, {(0, 0): Fraction(1)}]
    for u, gamma, f in sorted(walls, key=lambda w: _angle(w[0])):
        velocity = (-u[1], u[0])
        pairing = gamma[0] * velocity[0] + gamma[1] * velocity[1]
        assert pairing != 0, f"tangent crossing at {u}"
        s = 1 if pairing > 0 else -1
        kappa = _iota(skew, gamma)
        wall_ratios = [series_pow(f, s * kappa[j], order) for j in range(2)]
        ratios = [series_mul(wall_ratios[j], _substitute(ratios[j], wall_ratios, order), order) for j in range(2)]
    return ratios


def loop_defect(walls, skew, order):
    """一周の合成から恒等写像を引いた項 {e: (Δ_1, Δ_2)}（空なら整合的）"""
    ratios = compose_loop(walls, skew, order)
    out = {}
    for j, ratio in enumerate(ratios):
        for e, c in ratio.items():
            value = c - 1 if e == (0, 0) else c
            if value:
                out.setdefault(e, [Fraction(0), Fraction(0)])[j] = value
    return out


def _primitive(v):
    d = gcd(abs(v[0]), abs(v[1]))
    return (v[0] // d, v[1] // d)


def initial_walls(skew):
    walls = []
    for i in range(2):
        if any(skew[i]):
            s = (1, 0) if i == 0 else (0, 1)
            u = (-s[1], s[0])
            f = {(0, 0): Fraction(1), s: Fraction(1)}
            walls.append((u, s, f))
            walls.append(((-u[0], -u[1]), s, f))
    return walls


def complete_walls(skew, order):
    """
    単項式ごとに壁を足していく補完

    次数 d の欠陥 z^e ごとに、半直線 −ι_{γ0}ω 上に 1 + c z^e を置く。
    """
    walls = initial_walls(skew)
    for degree in range(1, order + 1):
        defects = loop_defect(walls, skew, degree)
        for e, deltas in sorted(defects.items()):
            if _deg(e) < degree:
                raise AssertionError(f"defect {e} below degree {degree} survived")
            if _deg(e) > degree:
                continue
            gamma = _primitive(e)
            kappa = _iota(skew, gamma)
            u = _primitive((-kappa[0], -kappa[1]))
            velocity = (-u[1], u[0])
            s = 1 if gamma[0] * velocity[0] + gamma[1] * velocity[1] > 0 else -1
            j = 0 if kappa[0] else 1
            c = -deltas[j] / (s * kappa[j])
            walls.append((u, gamma, {(0, 0): Fraction(1), e: c}))
    return walls


def wall_rays(walls):
    rays = []
    for u, _, _ in walls:
        if u not in rays:
            rays.append(u)
    return rays


def chamber_product(walls, point, order):
    """point を含む壁の関数の積"""
    result = {(0, 0): Fraction(1)}
    for u, _, f in walls:
        if u[0] * point[1] - u[1] * point[0] == 0 and u[0] * point[0] + u[1] * point[1] > 0:
            result = series_mul(result, f, order)
    return result


def kronecker_skew(m):
    return ((0, m), (-m, 0))
