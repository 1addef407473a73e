"""
コマンドラインの入口

    python -m src.cli complete --quiver doc/presets/kronecker1.json --order 6

JSON は標準出力（または --output）に、ログは標準エラーに出す。
終了コード: 0 成功、1 入力・仮定のエラー、2 verify の検証失敗。
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple

from src.completion import check_consistency
from src.errors import ConsistencyError, DomainError, EngineError, SchemaError
from src.modules.correspondence import (
    gamma_of_chern,
    local_p2_sheaf_dt,
    pullback,
    verify_comparison,
    verify_main,
)
from src.modules.hdtv import HDTV, curve_class, gw_combination
from src.modules.presets import get_preset, preset_names
from src.modules.quiver_dt import QuiverDT, dt_invariants
from src.render import render_svg
from src.scattering import dump, remove_central_walls
from src.schema import (
    Bundle,
    load_bundle,
    load_diagram_file,
    load_psi,
    load_quiver,
    load_seed,
    parse_int_vector,
    parse_rational_vector,
    read_gammas,
    write_json,
)

logger = logging.getLogger(__name__)

COMMANDS = ("complete", "dt", "hdtv", "pullback", "verify", "localp2", "export")
ORDER_ZERO_OK = ("complete", "pullback", "verify")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ASSERTION = 2


@dataclass(frozen=True)
class RunConfig:
    """1回の実行の設定（argparse から作る）"""

    command: str
    subcommand: Optional[str] = None
    quiver_path: Optional[str] = None
    seed_path: Optional[str] = None
    psi_path: Optional[str] = None
    bundle_path: Optional[str] = None
    diagram_path: Optional[str] = None
    gammas_path: Optional[str] = None
    order: int = 6
    output_format: str = "json"
    sample_seed: int = 0
    output_path: Optional[str] = None
    svg_path: Optional[str] = None
    label_degree: int = 2
    log_level: str = "WARNING"
    experimental: bool = False
    gamma: Optional[Tuple[int, ...]] = None
    theta: Optional[Tuple[Fraction, ...]] = None
    point: Optional[Tuple[Fraction, ...]] = None
    A: Optional[Tuple[int, ...]] = None
    chern: Optional[Tuple[int, ...]] = None
    preset: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise DomainError(f"Unknown command {self.command!r}")
        minimum = 0 if self.command in ORDER_ZERO_OK else 1
        if self.order < minimum:
            raise DomainError(f"--order must be ≥ {minimum} for {self.command}, got {self.order}")
        if self.output_format not in ("json", "svg"):
            raise DomainError(f"--format must be json or svg, got {self.output_format!r}")
        if self.output_format == "svg" and not self.svg_path:
            raise DomainError("--format svg needs --svg PATH")


class CommandLineParser(argparse.ArgumentParser):
    """引数の誤りを終了せずに SchemaError として投げる（サブコマンドにも継承される）"""

    def error(self, message):
        raise SchemaError(message, field="argv")


def build_parser() -> argparse.ArgumentParser:
    parser = CommandLineParser(prog="python -m src.cli", description="Scattering diagrams and DT invariants.")
    parser.add_argument("--log-level", default="WARNING", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    parser.add_argument("--sample-seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, svg=True):
        p.add_argument("--order", type=int, default=6)
        p.add_argument("--output")
        if svg:
            p.add_argument("--format", dest="output_format", default="json", choices=("json", "svg"))
            p.add_argument("--svg")
            p.add_argument("--label-degree", type=int, default=2)

    def inputs(p, *names):
        p.add_argument("--bundle", help="one file with quiver, seed and psi tables")
        for name in names:
            p.add_argument(f"--{name}")

    p = sub.add_parser("complete", help="complete the initial cluster diagram of a quiver")
    inputs(p, "quiver")
    p.add_argument("--experimental", action="store_true")
    common(p)

    p = sub.add_parser("dt", help="DT invariants of a dimension vector at θ")
    inputs(p, "quiver")
    p.add_argument("--gamma", required=True)
    p.add_argument("--theta", required=True)
    p.add_argument("--preset", choices=preset_names())
    p.add_argument("--experimental", action="store_true")
    common(p, svg=False)

    p = sub.add_parser("hdtv", help="complete the initial HDTV diagram of a seed")
    inputs(p, "seed")
    p.add_argument("--point")
    p.add_argument("--A", dest="A")
    common(p)

    p = sub.add_parser("pullback", help="pull a completed quiver diagram back along psi")
    inputs(p, "quiver", "seed", "psi")
    common(p)

    p = sub.add_parser("verify", help="check the comparison or the main correspondence on a preset")
    p.add_argument("subcommand", choices=("comparison", "main"))
    p.add_argument("--preset", required=True, choices=preset_names())
    p.add_argument("--gammas")
    common(p, svg=False)

    p = sub.add_parser("localp2", help="DT invariant of a normalized sheaf on local P^2")
    p.add_argument("--chern", required=True)
    common(p, svg=False)

    p = sub.add_parser("export", help="render a diagram dump as SVG")
    p.add_argument("--diagram", required=True)
    p.add_argument("--svg", required=True)
    p.add_argument("--label-degree", type=int, default=2)
    p.add_argument("--output")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return RunConfig(
        command=args.command,
        subcommand=get("subcommand"),
        quiver_path=get("quiver"),
        seed_path=get("seed"),
        psi_path=get("psi"),
        bundle_path=get("bundle"),
        diagram_path=get("diagram"),
        gammas_path=get("gammas"),
        order=get("order") if get("order") is not None else 6,
        output_format=get("output_format") or "json",
        sample_seed=args.sample_seed,
        output_path=get("output"),
        svg_path=get("svg"),
        label_degree=get("label_degree") if get("label_degree") is not None else 2,
        log_level=args.log_level,
        experimental=bool(get("experimental")),
        gamma=parse_int_vector(args.gamma, "--gamma") if get("gamma") else None,
        theta=parse_rational_vector(args.theta, "--theta") if get("theta") else None,
        point=parse_rational_vector(args.point, "--point") if get("point") else None,
        A=parse_int_vector(args.A, "--A") if get("A") else None,
        chern=parse_int_vector(args.chern, "--chern") if get("chern") else None,
        preset=get("preset"),
    )


# --- コマンド ---


def _inputs(config: RunConfig, *names: str) -> list:
    """
    quiver / seed / psi を個別のファイルか --bundle から読む（個別のファイルが優先）

    Raises:
        SchemaError: どちらにも見つからない
    """
    bundle = load_bundle(config.bundle_path) if config.bundle_path else Bundle()
    paths = {"quiver": config.quiver_path, "seed": config.seed_path, "psi": config.psi_path}
    loaders = {"quiver": load_quiver, "seed": load_seed, "psi": load_psi}
    values = []
    for name in names:
        value = loaders[name](paths[name]) if paths[name] else getattr(bundle, name)
        if value is None:
            raise SchemaError(f"{config.command} needs --{name} or a --bundle with a {name} table", config.bundle_path, name)
        values.append(value)
    return values


def _maybe_svg(config: RunConfig, diagram) -> Dict[str, object]:
    if not config.svg_path:
        return {}
    render_svg(diagram, config.svg_path, config.label_degree)
    return {"svg": str(config.svg_path)}


def _complete(config: RunConfig) -> Tuple[Dict[str, object], int]:
    (quiver,) = _inputs(config, "quiver")
    engine = QuiverDT(quiver)
    engine.set_parameter("experimental", config.experimental)
    diagram = engine.process(config.order)
    data = dump(diagram)
    data.update(_maybe_svg(config, diagram))
    return data, EXIT_OK


def _dt(config: RunConfig) -> Tuple[Dict[str, object], int]:
    (quiver,) = _inputs(config, "quiver")
    preset = get_preset(config.preset) if config.preset else None
    record = dt_invariants(quiver, config.gamma, config.theta, config.order, experimental=config.experimental, preset=preset)
    return record.to_dict(), EXIT_OK


def _hdtv(config: RunConfig) -> Tuple[Dict[str, object], int]:
    (seed,) = _inputs(config, "seed")
    engine = HDTV(seed)
    diagram = engine.process(config.order)
    data: Dict[str, object] = {"diagram": dump(diagram)}
    if config.point is not None:
        f_in, f_out = engine.split(config.point, config.order)
        data["point"] = [str(c) for c in config.point]
        data["f_in"] = f_in.to_json()["terms"]
        data["f_out"] = f_out.to_json()["terms"]
        if config.A is not None:
            data["curve_class"] = curve_class(seed, config.A, config.point).to_dict()
            data["sum_ktau_N"] = str(gw_combination(seed, config.A, config.point, config.order, engine=engine))
    elif config.A is not None:
        raise DomainError("--A needs --point")
    data.update(_maybe_svg(config, diagram))
    return data, EXIT_OK


def _pullback(config: RunConfig) -> Tuple[Dict[str, object], int]:
    quiver, seed, psi = _inputs(config, "quiver", "seed", "psi")
    qdiagram = remove_central_walls(QuiverDT(quiver).process(config.order))
    pulled = pullback(qdiagram, psi, seed)
    data = dump(pulled)
    data["consistency"] = check_consistency(pulled).to_dict()
    data.update(_maybe_svg(config, pulled))
    return data, EXIT_OK


def _verify(config: RunConfig) -> Tuple[Dict[str, object], int]:
    preset = get_preset(config.preset)
    if config.subcommand == "comparison":
        report = verify_comparison(preset, config.order)
        return report.to_dict(), EXIT_OK if report.equivalent else EXIT_ASSERTION
    gammas = read_gammas(config.gammas_path) if config.gammas_path else None
    report = verify_main(preset, gammas, config.order, sample_seed=config.sample_seed)
    return report.to_dict(), EXIT_OK if report.ok else EXIT_ASSERTION


def _localp2(config: RunConfig) -> Tuple[Dict[str, object], int]:
    record = local_p2_sheaf_dt(config.chern, config.order)
    data = record.to_dict()
    data["chern"] = gamma_of_chern(config.chern).to_dict()
    return data, EXIT_OK


def _export(config: RunConfig) -> Tuple[Dict[str, object], int]:
    diagram = load_diagram_file(config.diagram_path)
    render_svg(diagram, config.svg_path, config.label_degree)
    return {"svg": str(config.svg_path), "walls": len(diagram.walls), "order": diagram.order}, EXIT_OK


HANDLERS = {
    "complete": _complete,
    "dt": _dt,
    "hdtv": _hdtv,
    "pullback": _pullback,
    "verify": _verify,
    "localp2": _localp2,
    "export": _export,
}


def run(config: RunConfig) -> int:
    """
    設定どおりに1つのコマンドを実行し、結果を JSON で書き出す

    Returns:
        終了コード
    """
    try:
        data, status = HANDLERS[config.command](config)
    except (EngineError, ConsistencyError) as exc:
        logger.error(f"{config.command} failed: {exc}")
        sys.stdout.write(write_json({"error": str(exc), "kind": exc.kind}))
        return EXIT_INVALID
    text = write_json(data, config.output_path)
    if config.output_path is None:
        sys.stdout.write(text)
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SchemaError as exc:
        sys.stdout.write(write_json({"error": str(exc), "kind": exc.kind}))
        return EXIT_INVALID
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    try:
        config = config_from_args(args)
    except EngineError as exc:
        sys.stdout.write(write_json({"error": str(exc), "kind": exc.kind}))
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
