import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

from src.errors import DomainError
from src.lattice import (
    CompatibilityMap,
    Quiver,
    SymplecticSeed,
    ValidationReport,
    validate_compatibility,
    validate_seed,
)

logger = logging.getLogger(__name__)

DET = ((0, 1), (-1, 0))

KRONECKER_CITATION = "acyclic quiver: the zero potential has trivial attractor invariants"
LOCAL_P2_CITATION = "quiver with potential of local P^2: trivial attractor invariants proved for its BPS quiver"
CUBIC_CITATION = "ideal triangulation of the 4-punctured sphere: nondegenerate potential with trivial attractor invariants"


@dataclass(frozen=True)
class Preset:
    """
    クイバー・シード・互換写像の組

    citation はアトラクター不変量が自明であるという仮定の出典。
    """

    name: str
    quiver: Quiver
    seed: SymplecticSeed
    psi: CompatibilityMap
    citation: str

    def validate(self) -> Tuple[ValidationReport, ValidationReport]:
        return validate_seed(self.seed), validate_compatibility(self.quiver, self.seed, self.psi)

    def to_dict(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "citation": self.citation,
            "quiver": {
                "vertex_count": self.quiver.vertex_count,
                "arrow_counts": [list(r) for r in self.quiver.arrow_counts],
                "trivial_attractor": self.quiver.trivial_attractor,
            },
            "seed": {
                "rank": self.seed.rank,
                "e_vectors": [list(e) for e in self.seed.e_vectors],
                "omega": [list(r) for r in self.seed.omega],
                "fan_rays": [list(r) for r in self.seed.fan_rays],
            },
            "psi": [list(r) for r in self.psi.matrix],
        }


def quiver_from_seed(e_vectors: Sequence[Sequence[int]], omega, **kwargs) -> Quiver:
    """ω_Q(s_i, s_j) = ω(e_i, e_j) となるクイバー（正の成分を矢の本数にする）"""
    n = len(e_vectors)
    rank = len(omega)
    counts = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            w = sum(e_vectors[i][a] * omega[a][b] * e_vectors[j][b] for a in range(rank) for b in range(rank))
            counts[i][j] = max(w, 0)
    return Quiver(n, tuple(tuple(r) for r in counts), **kwargs)


def _build(name: str, e_vectors, fan_rays, citation: str) -> Preset:
    quiver = quiver_from_seed(e_vectors, DET, trivial_attractor=True, name=name, citation=citation)
    seed = SymplecticSeed(2, tuple(e_vectors), DET, tuple(fan_rays), name=name)
    return Preset(name, quiver, seed, CompatibilityMap.from_columns(e_vectors), citation)


def kronecker_preset(m: int) -> Preset:
    """
    m-クロネッカー・クイバー

    m = 1 では ψ は恒等写像、m ≥ 2 では e_1 = (1,1), e_2 = (1−m, 1)。
    """
    if m == 1:
        return _build("kronecker1", [(1, 0), (0, 1)], [(1, 0), (0, 1), (-1, 0), (0, -1)], KRONECKER_CITATION)
    if m == 2:
        fan = [(1, 0), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1)]
        return _build("kronecker2", [(1, 1), (-1, 1)], fan, KRONECKER_CITATION)
    if m == 3:
        fan = [(1, 0), (0, 1), (-1, 1), (-1, 0), (-1, -1), (-1, -2), (0, -1)]
        return _build("kronecker3", [(1, 1), (-2, 1)], fan, KRONECKER_CITATION)
    raise DomainError(f"No Kronecker preset for m = {m}")


def local_p2_preset() -> Preset:
    """局所 P²: e = (1,1), (−2,1), (1,−2)、v_i を含むように細分した滑らかな扇"""
    fan = [(1, 0), (2, 1), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (-1, -2), (0, -1)]
    return _build("local_p2", [(1, 1), (-2, 1), (1, -2)], fan, LOCAL_P2_CITATION)


def cubic_preset() -> Preset:
    """3次曲面: e_1 = e_2 = (1,0), e_3 = e_4 = (0,1), e_5 = e_6 = (−1,−1)"""
    fan = [(1, 0), (0, 1), (-1, 0), (0, -1), (1, -1)]
    e_vectors = [(1, 0), (1, 0), (0, 1), (0, 1), (-1, -1), (-1, -1)]
    return _build("cubic", e_vectors, fan, CUBIC_CITATION)


PRESETS: Dict[str, Callable[[], Preset]] = {
    "kronecker1": lambda: kronecker_preset(1),
    "kronecker2": lambda: kronecker_preset(2),
    "kronecker3": lambda: kronecker_preset(3),
    "local_p2": local_p2_preset,
    "cubic": cubic_preset,
}


def preset_names() -> List[str]:
    return list(PRESETS)


def get_preset(name: str) -> Preset:
    """
    名前からプリセットを取得

    Raises:
        DomainError: 未知の名前
    """
    factory = PRESETS.get(name)
    if factory is None:
        raise DomainError(f"Unknown preset {name!r}; choose one of {', '.join(PRESETS)}")
    preset = factory()
    logger.debug(f"Loaded preset {name}")
    return preset
