"""
入力ファイル（JSON / TOML）の読み込みと正規化した JSON の書き出し

頂点番号はファイル上では1始まり。1つのファイルに quiver・seed・psi の表を
まとめて書いてもよい（プリセットのファイルはこの形）。書式は doc/SCHEMA.md を参照。
"""

import json
import logging
import tomllib
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.errors import EngineError, SchemaError
from src.lattice import CompatibilityMap, Quiver, SymplecticSeed
from src.scattering import ScatteringDiagram, load_diagram

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def read_document(path: PathLike) -> Dict[str, Any]:
    """
    拡張子で JSON / TOML を選んで読む

    Raises:
        SchemaError: ファイルがない、または構文エラー
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"Cannot read input file: {exc.strerror}", str(path)) from exc
    if path.suffix.lower() == ".toml":
        try:
            data = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            raise SchemaError(f"Invalid TOML: {exc}", str(path)) from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"Invalid JSON: {exc.msg}", str(path), line=exc.lineno) from exc
    if not isinstance(data, dict):
        raise SchemaError("Top level must be an object/table", str(path))
    logger.debug(f"Read {path} ({len(data)} top-level keys)")
    return data


# --- フィールドの検査 ---


def _require(table: Mapping[str, Any], key: str, path: Optional[str], prefix: str) -> Any:
    if key not in table:
        raise SchemaError("Missing required field", path, f"{prefix}.{key}" if prefix else key)
    return table[key]


def _int(value: Any, path: Optional[str], where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"Expected an integer, got {value!r}", path, where)
    return value


def _int_vector(value: Any, path: Optional[str], where: str, length: Optional[int] = None) -> Tuple[int, ...]:
    if not isinstance(value, list):
        raise SchemaError(f"Expected a list of integers, got {value!r}", path, where)
    vec = tuple(_int(c, path, f"{where}[{i}]") for i, c in enumerate(value))
    if length is not None and len(vec) != length:
        raise SchemaError(f"Expected {length} entries, got {len(vec)}", path, where)
    return vec


def _int_matrix(value: Any, path: Optional[str], where: str, rows: Optional[int] = None, cols: Optional[int] = None) -> Tuple[Tuple[int, ...], ...]:
    if not isinstance(value, list):
        raise SchemaError(f"Expected a list of rows, got {value!r}", path, where)
    matrix = tuple(_int_vector(row, path, f"{where}[{i}]", cols) for i, row in enumerate(value))
    if rows is not None and len(matrix) != rows:
        raise SchemaError(f"Expected {rows} rows, got {len(matrix)}", path, where)
    return matrix


def _table(data: Mapping[str, Any], key: str, path: Optional[str]) -> Mapping[str, Any]:
    table = data.get(key, data)
    if not isinstance(table, dict):
        raise SchemaError("Expected a table", path, key)
    return table


# --- クイバー・シード・ψ ---


def quiver_from_table(table: Mapping[str, Any], path: Optional[str] = None, prefix: str = "quiver") -> Quiver:
    """
    {"vertices": n, "arrows": [[from, to, count], ...]} または {"vertices": n, "arrow_counts": [[...]]}
    """
    n = _int(_require(table, "vertices", path, prefix), path, f"{prefix}.vertices")
    if n < 1:
        raise SchemaError(f"A quiver needs at least one vertex, got {n}", path, f"{prefix}.vertices")
    name = str(table.get("name", Path(path).stem if path else "quiver"))
    trivial = table.get("trivial_attractor", False)
    if not isinstance(trivial, bool):
        raise SchemaError(f"Expected true/false, got {trivial!r}", path, f"{prefix}.trivial_attractor")
    citation = str(table.get("citation", ""))
    if "arrow_counts" in table:
        counts = _int_matrix(table["arrow_counts"], path, f"{prefix}.arrow_counts", n, n)
        return Quiver(n, counts, trivial_attractor=trivial, name=name, citation=citation)
    arrows: List[Tuple[int, int, int]] = []
    for i, arrow in enumerate(table.get("arrows", [])):
        where = f"{prefix}.arrows[{i}]"
        source, target, count = _int_vector(arrow, path, where, 3)
        if not (1 <= source <= n and 1 <= target <= n):
            raise SchemaError(f"Vertex out of range 1..{n}", path, where)
        if count < 0:
            raise SchemaError("Arrow count must be non-negative", path, where)
        arrows.append((source - 1, target - 1, count))
    return Quiver.from_arrows(n, arrows, trivial_attractor=trivial, name=name, citation=citation)


def seed_from_table(table: Mapping[str, Any], path: Optional[str] = None, prefix: str = "seed") -> SymplecticSeed:
    """{"rank": 2, "e_vectors": [...], "omega": [[...]], "fan_rays": [...]}"""
    rank = _int(_require(table, "rank", path, prefix), path, f"{prefix}.rank")
    e_vectors = _int_matrix(_require(table, "e_vectors", path, prefix), path, f"{prefix}.e_vectors", cols=rank)
    omega = _int_matrix(_require(table, "omega", path, prefix), path, f"{prefix}.omega", rank, rank)
    fan = _int_matrix(table.get("fan_rays", []), path, f"{prefix}.fan_rays", cols=rank)
    name = str(table.get("name", Path(path).stem if path else "seed"))
    return SymplecticSeed(rank, e_vectors, omega, fan, name=name)


def psi_from_table(table: Mapping[str, Any], path: Optional[str] = None, prefix: str = "psi") -> CompatibilityMap:
    """{"columns": [ψ(s_1), ψ(s_2), ...]} または {"matrix": [[...]]}"""
    if "columns" in table:
        columns = _int_matrix(table["columns"], path, f"{prefix}.columns")
        if not columns or len({len(c) for c in columns}) != 1:
            raise SchemaError("Columns must be non-empty and of equal length", path, f"{prefix}.columns")
        return CompatibilityMap.from_columns(columns)
    matrix = _int_matrix(_require(table, "matrix", path, prefix), path, f"{prefix}.matrix")
    if not matrix or len({len(r) for r in matrix}) != 1:
        raise SchemaError("Matrix must be non-empty and rectangular", path, f"{prefix}.matrix")
    return CompatibilityMap(matrix)


def _wrap(loader, data: Mapping[str, Any], key: str, path: Optional[str]):
    try:
        return loader(_table(data, key, path), path, key)
    except SchemaError:
        raise
    except EngineError as exc:
        raise SchemaError(str(exc), path, key) from exc


def load_quiver(path: PathLike) -> Quiver:
    return _wrap(quiver_from_table, read_document(path), "quiver", str(path))


def load_seed(path: PathLike) -> SymplecticSeed:
    return _wrap(seed_from_table, read_document(path), "seed", str(path))


def load_psi(path: PathLike) -> CompatibilityMap:
    return _wrap(psi_from_table, read_document(path), "psi", str(path))


@dataclass
class Bundle:
    """1つのファイルにまとめた quiver / seed / psi（ないものは None）"""

    quiver: Optional[Quiver] = None
    seed: Optional[SymplecticSeed] = None
    psi: Optional[CompatibilityMap] = None


def load_bundle(path: PathLike) -> Bundle:
    data = read_document(path)
    bundle = Bundle()
    if "quiver" in data:
        bundle.quiver = _wrap(quiver_from_table, data, "quiver", str(path))
    if "seed" in data:
        bundle.seed = _wrap(seed_from_table, data, "seed", str(path))
    if "psi" in data:
        bundle.psi = _wrap(psi_from_table, data, "psi", str(path))
    return bundle


def load_diagram_file(path: PathLike) -> ScatteringDiagram:
    """complete などが書き出したダンプを読む"""
    data = read_document(path)
    try:
        return load_diagram(data, str(path))
    except SchemaError:
        raise
    except EngineError as exc:
        raise SchemaError(str(exc), str(path), "walls") from exc


# --- 書き出し ---


def canonical_json(data: Any) -> str:
    """キーを整列した、実行ごとにバイト単位で同一の JSON"""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(data: Any, path: Optional[PathLike] = None) -> str:
    text = canonical_json(data)
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {path}")
    return text


def parse_rational_vector(text: str, where: str = "vector") -> Tuple:
    """"1,-1/2,3" → (Fraction(1), Fraction(-1, 2), Fraction(3))"""
    try:
        return tuple(Fraction(part.strip()) for part in text.split(",") if part.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"Cannot parse {text!r} as a comma-separated rational vector", field=where) from exc


def parse_int_vector(text: str, where: str = "vector") -> Tuple[int, ...]:
    values = parse_rational_vector(text, where)
    if any(v.denominator != 1 for v in values):
        raise SchemaError(f"Expected integers in {text!r}", field=where)
    return tuple(int(v) for v in values)


def read_gammas(path: PathLike) -> List[Tuple[int, ...]]:
    """{"gammas": [[...], ...]}"""
    data = read_document(path)
    rows = _require(data, "gammas", str(path), "")
    return list(_int_matrix(rows, str(path), "gammas"))

