"""
乱数で選んで厳密に検証する一般点の生成

乱数は numpy の default_rng（シード固定）から取り、選んだ点は必ず厳密な
非所属判定で検証する。検証に失敗したら引き直すので、乱数は報告に現れる
証拠点を変えるだけで、結果の正しさには影響しない。
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from src.errors import DimensionError, DomainError
from src.lattice import (
    Quiver,
    attractor_point,
    dot,
    is_gamma_general,
    iter_dimension_vectors,
    primitive,
)
from src.scattering import ScatteringDiagram, _cross3, _det3, _sector_midpoints_2d, singular_walls

logger = logging.getLogger(__name__)

MAX_REDRAWS = 64

ATTRACTOR = "attractor"
ANTI_ATTRACTOR = "anti-attractor"
GENERIC = "generic"


@dataclass(frozen=True)
class ChamberPoint:
    """部屋の証拠点"""

    theta: Tuple[Fraction, ...]
    note: str

    def to_dict(self):
        return {"theta": [str(c) for c in self.theta], "chamber": self.note}


class SampleGenerator:
    """
    シード付きの一般点生成器

    Args:
        seed: 乱数のシード
    """

    def __init__(self, seed: int = 0):
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    def scale(self) -> int:
        """証拠点に掛ける正の整数"""
        return int(self.rng.integers(1, 10))

    def chamber_point(self, quiver: Quiver, gamma: Sequence[int], note: str, bound: int) -> ChamberPoint:
        """
        γ^⊥ のアトラクター側 / 反アトラクター側の一般点

        Raises:
            DomainError: γ ∈ ker ω_Q、または検証を通る点が見つからない
        """
        chambers = enumerate_chambers(quiver, gamma, bound)
        matching = [c for c in chambers if c.note == note]
        if not matching:
            raise DomainError(f"No {note} chamber for {tuple(gamma)} up to degree {bound}")
        base = matching[0].theta
        k = self.scale()
        return ChamberPoint(tuple(c * k for c in base), note)

    def points_on_diagram(self, diagram: ScatteringDiagram, count: int) -> List[Tuple[Fraction, ...]]:
        """
        図式の壁上または壁の外にある、検証済みの一般点を count 個

        階数2のみ。壁の半直線上の点を半分、ランダムな点を残りとする。
        """
        if diagram.ambient_rank != 2:
            raise DimensionError("points_on_diagram is implemented for ambient rank 2")
        rays = [u for w in diagram.walls for u in w.support.line_directions()]
        points: List[Tuple[Fraction, ...]] = []
        redraws = 0
        while len(points) < count:
            if rays and len(points) % 2 == 0:
                u = rays[int(self.rng.integers(0, len(rays)))]
                k = self.scale()
                candidate = tuple(Fraction(c * k) for c in u)
            else:
                a, b = (int(v) for v in self.rng.integers(-50, 51, size=2))
                candidate = (Fraction(a), Fraction(b))
            if all(c == 0 for c in candidate) or singular_walls(diagram, candidate):
                redraws += 1
                if redraws > MAX_REDRAWS * max(count, 1):
                    raise DomainError("Could not draw enough generic points")
                logger.warning(f"Redrew sample point {candidate}")
                continue
            points.append(candidate)
        return points


def _plane_coordinates(normal: Sequence[int], b1: Sequence[int], b2: Sequence[int], x: Sequence) -> Tuple:
    d = _det3(normal, b1, b2)
    s = 1 if d > 0 else -1
    return (_det3(normal, x, b2) * s, _det3(normal, b1, x) * s)


def _same_chamber(cuts: Sequence[Sequence[int]], a: Sequence, b: Sequence) -> bool:
    for g in cuts:
        sa, sb = dot(g, a), dot(g, b)
        if sa == 0 or sb == 0 or (sa > 0) != (sb > 0):
            return False
    return True


def enumerate_chambers(quiver: Quiver, gamma: Sequence[int], bound: int) -> List[ChamberPoint]:
    """
    γ^⊥ から (γ')^⊥（deg γ' ≤ bound, γ' は γ と非共線）を除いた各連結成分の代表点

    階数2では2本の半直線、階数3では平面の扇形になる。
    """
    gamma = tuple(int(c) for c in gamma)
    n = quiver.vertex_count
    if len(gamma) != n:
        raise DimensionError(f"Dimension vector {gamma} has length {len(gamma)}, expected {n}")
    attractor = attractor_point(quiver, gamma).coords
    if all(c == 0 for c in attractor):
        raise DomainError(f"{gamma} lies in ker ω_Q; its chambers are not distinguished")
    prim = primitive(gamma)[0]
    cuts = [g for g in iter_dimension_vectors(n, bound) if primitive(g)[0] != prim]
    anti = tuple(-c for c in attractor)
    if n == 2:
        candidates = [attractor, anti]
    elif n == 3:
        basis = [c for c in (_cross3(gamma, e) for e in ((1, 0, 0), (0, 1, 0), (0, 0, 1))) if any(c)]
        b1 = basis[0]
        b2 = next(b for b in basis[1:] if any(_cross3(b1, b)))
        lines = []
        for g in cuts:
            line = _cross3(gamma, g)
            if any(line):
                lines.extend([line, tuple(-c for c in line)])
        planar = [_plane_coordinates(gamma, b1, b2, v) for v in lines]
        candidates = [tuple(p * a + q * b for a, b in zip(b1, b2)) for p, q in _sector_midpoints_2d(planar)]
    else:
        raise DimensionError(f"Chamber enumeration is implemented for 2 and 3 vertices, got {n}")
    chambers = []
    for theta in candidates:
        theta = tuple(Fraction(c) for c in theta)
        if not is_gamma_general(quiver, theta, gamma, bound):
            continue
        if _same_chamber(cuts, theta, attractor):
            note = ATTRACTOR
        elif _same_chamber(cuts, theta, anti):
            note = ANTI_ATTRACTOR
        else:
            note = GENERIC
        chambers.append(ChamberPoint(theta, note))
    logger.debug(f"{quiver.name}: {len(chambers)} chambers for {gamma} up to degree {bound}")
    return chambers


def chamber_note(quiver: Quiver, gamma: Sequence[int], theta: Sequence, bound: int) -> str:
    """θ がアトラクター側・反アトラクター側・その他のどれか"""
    attractor = attractor_point(quiver, gamma).coords
    prim = primitive(gamma)[0]
    cuts = [g for g in iter_dimension_vectors(quiver.vertex_count, bound) if primitive(g)[0] != prim]
    theta = tuple(Fraction(c) for c in theta)
    if _same_chamber(cuts, theta, attractor):
        return ATTRACTOR
    if _same_chamber(cuts, theta, tuple(-c for c in attractor)):
        return ANTI_ATTRACTOR
    return GENERIC
