"""
階数2の散乱図式を SVG に描く
"""

import logging
from pathlib import Path
from typing import List, Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from src.errors import DimensionError  # noqa: E402
from src.scattering import ScatteringDiagram, WallTag  # noqa: E402
from src.series import TruncatedSeries  # noqa: E402

logger = logging.getLogger(__name__)

RADIUS = 1.0
COLORS = {WallTag.INITIAL: "#1f3b73", WallTag.ADDED: "#c0392b", WallTag.CENTRAL: "#7f8c8d"}


def _monomial(context, exponent) -> str:
    r = context.lattice_rank
    parts = []
    lattice, t = exponent[:r], exponent[r:]
    for i, a in enumerate(t):
        if a:
            parts.append(f"t{i + 1}" if a == 1 else f"t{i + 1}^{a}")
    if any(lattice):
        parts.append("z^(" + ",".join(str(c) for c in lattice) + ")")
    return "·".join(parts) or "1"


def format_function(f: TruncatedSeries, max_degree: int) -> str:
    """次数 max_degree までの項を並べた短い表記"""
    shown = []
    hidden = False
    for exponent, coeff in f.items():
        if f.context.degree(exponent) > max_degree:
            hidden = True
            continue
        mono = _monomial(f.context, exponent)
        if mono == "1":
            shown.append(str(coeff))
        elif coeff == 1:
            shown.append(mono)
        else:
            shown.append(f"{coeff}·{mono}")
    text = " + ".join(shown)
    return text + " + …" if hidden else text


def render_svg(
    diagram: ScatteringDiagram, path: Union[str, Path], label_degree: int = 2, title: Optional[str] = None
) -> Path:
    """
    壁を原点からの線分として描き、次数 label_degree までの壁関数を添える

    Args:
        diagram: 階数2の図式
        path: 出力先
        label_degree: ラベルに載せる最大次数
        title: 図の題（省略時は図式の名前と次数）
    """
    if diagram.ambient_rank != 2:
        raise DimensionError(f"SVG export draws ambient rank 2 diagrams, got rank {diagram.ambient_rank}")
    path = Path(path)
    plt.rcParams["svg.hashsalt"] = "scattering-dt-engine"
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    labels: List[str] = []
    for wall in sorted(diagram.walls, key=lambda w: w.sort_key()):
        color = COLORS.get(wall.tag, "black")
        for u in wall.support.line_directions():
            vec = np.array(u, dtype=float)
            end = RADIUS * vec / np.linalg.norm(vec)
            ax.plot([0.0, end[0]], [0.0, end[1]], color=color, lw=1.6 if wall.tag is WallTag.INITIAL else 1.0)
        u = wall.support.line_directions()[0]
        vec = np.array(u, dtype=float)
        tip = 1.05 * RADIUS * vec / np.linalg.norm(vec)
        label = format_function(wall.function, label_degree)
        labels.append(label)
        ax.annotate(label, xy=(tip[0], tip[1]), fontsize=7, color=color, ha="center", va="center")
    ax.plot([0.0], [0.0], "k.", ms=3)
    ax.set_xlim(-1.5, 1.5)
    ax.set_ylim(-1.5, 1.5)
    ax.set_aspect("equal")
    ax.axis("off")
    ax.set_title(title or f"{diagram.context.name or 'diagram'} (order {diagram.order})", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.info(f"Wrote {path} ({len(diagram.walls)} walls, {len(labels)} labels)")
    return path
