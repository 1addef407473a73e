#!/usr/bin/env python3
"""
コマンドラインのテスト（標準出力の JSON と終了コード）
"""

import io
import json
import os
import tempfile
from contextlib import redirect_stdout

from test_utils import preset_path, run_suite
from src import cli


def _run(*argv):
    """cli.main を呼んで (終了コード, 標準出力の JSON, 生の文字列) を返す"""
    buffer = io.StringIO()
    with redirect_stdout(buffer):
        status = cli.main([str(a) for a in argv])
    text = buffer.getvalue()
    return status, (json.loads(text) if text.strip() else None), text


def test_complete_kronecker1():
    status, data, _ = _run("complete", "--quiver", preset_path("kronecker1"), "--order", 6)
    assert status == cli.EXIT_OK
    assert data["format"] == 1
    assert len(data["walls"]) == 3
    assert [w["tag"] for w in data["walls"]].count("added") == 1


def test_output_is_deterministic():
    """同じ入力なら出力はバイト単位で同一"""
    args = ("complete", "--quiver", preset_path("kronecker2"), "--order", 5)
    assert _run(*args)[2] == _run(*args)[2]


def test_dt_command():
    status, data, _ = _run("dt", "--quiver", preset_path("kronecker1"), "--gamma", "1,1", "--theta", "1,-1")
    assert status == cli.EXIT_OK
    assert data["omega"] == "1"
    assert data["chamber"] == "anti-attractor"
    status, data, _ = _run("dt", "--quiver", preset_path("kronecker2"), "--gamma", "1,1", "--theta=-1,1")
    assert status == cli.EXIT_OK
    assert data["omega"] == "0"


def test_invalid_inputs_exit_with_one():
    """定義域・仮定・書式のエラーは終了コード1と kind 付きの JSON"""
    status, data, _ = _run("dt", "--quiver", preset_path("kronecker1"), "--gamma", "1,1", "--theta", "1,1")
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "domain"
    status, data, _ = _run("localp2", "--chern=1,-1,0", "--order", 3)
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "hypothesis"
    assert "−1<μ≤0" in data["error"]
    status, data, _ = _run("complete", "--quiver", preset_path("kronecker1"), "--order=-1")
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "domain"
    status, data, _ = _run("dt", "--quiver", preset_path("kronecker1"), "--gamma", "1,1", "--theta", "1,-1", "--order", 0)
    assert status == cli.EXIT_INVALID
    status, data, _ = _run("complete", "--quiver", os.path.join(tempfile.gettempdir(), "no_such_quiver.json"))
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "schema"
    status, data, _ = _run("complete", "--quiver", preset_path("kronecker1"), "--format", "svg")
    assert status == cli.EXIT_INVALID


def test_argument_errors_exit_with_one():
    """argparse の誤り（型・必須引数・未知のコマンド）も終了コード1と kind 付きの JSON"""
    status, data, _ = _run("complete", "--quiver", preset_path("kronecker1"), "--order", "abc")
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "schema"
    assert "--order" in data["error"]
    status, data, _ = _run("dt", "--quiver", preset_path("kronecker1"), "--theta", "1,-1")
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "schema" and "--gamma" in data["error"]
    status, data, _ = _run("frobnicate")
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "schema"
    status, data, _ = _run()
    assert status == cli.EXIT_INVALID


def test_localp2_command():
    status, data, _ = _run("localp2", "--chern=2,-1,0", "--order", 3)
    assert status == cli.EXIT_OK
    assert data["omega"] == "1"
    assert data["chern"]["gamma"] == [0, 1, 0]
    assert data["route"] == "simple"


def test_verify_commands():
    status, data, _ = _run("verify", "comparison", "--preset", "kronecker1", "--order", 4)
    assert status == cli.EXIT_OK
    assert data["equivalent"] is True
    with tempfile.TemporaryDirectory() as tmp:
        gammas = os.path.join(tmp, "gammas.json")
        with open(gammas, "w", encoding="utf-8") as f:
            json.dump({"gammas": [[1, 1], [1, 2]]}, f)
        status, data, _ = _run("verify", "main", "--preset", "kronecker1", "--gammas", gammas, "--order", 4)
    assert status == cli.EXIT_OK
    assert data["ok"] is True
    assert data["checked"] == 4


def test_hdtv_command():
    """x = (1,−1), A = (1,1) で f_out と曲線類と GW の和を返す"""
    status, data, _ = _run("hdtv", "--seed", preset_path("kronecker1"), "--order", 4, "--point=1,-1", "--A", "1,1")
    assert status == cli.EXIT_OK
    assert data["sum_ktau_N"] == "1"
    assert data["curve_class"]["balance"] == [0, 0]
    assert [[-1, 1], [1, 1], 1, 1] in data["f_out"]
    status, data, _ = _run("hdtv", "--seed", preset_path("kronecker1"), "--A", "1,1")
    assert status == cli.EXIT_INVALID


def test_pullback_command():
    path = preset_path("kronecker2")
    status, data, _ = _run("pullback", "--quiver", path, "--seed", path, "--psi", path, "--order", 4)
    assert status == cli.EXIT_OK
    assert data["consistency"]["consistent"] is True
    assert all(w["label"].startswith("psi*") for w in data["walls"])


def test_bundle_flag():
    """--bundle は1つのファイルの quiver / seed / psi を読み、個別の指定と同じ結果になる"""
    path = preset_path("kronecker2")
    separate = _run("pullback", "--quiver", path, "--seed", path, "--psi", path, "--order", 4)
    bundled = _run("pullback", "--bundle", path, "--order", 4)
    assert bundled[0] == cli.EXIT_OK
    assert bundled[2] == separate[2]
    status, data, _ = _run("complete", "--bundle", path, "--quiver", preset_path("kronecker1"), "--order", 6)
    assert status == cli.EXIT_OK
    assert len(data["walls"]) == 3
    status, data, _ = _run("hdtv", "--bundle", preset_path("local_p2"), "--order", 2)
    assert status == cli.EXIT_OK
    assert data["diagram"]["format"] == 1
    status, data, _ = _run("pullback", "--quiver", path, "--order", 2)
    assert status == cli.EXIT_INVALID
    assert data["kind"] == "schema" and "--seed" in data["error"]


def test_export_svg():
    """complete のダンプを読み戻して SVG に描く"""
    with tempfile.TemporaryDirectory() as tmp:
        dump_path = os.path.join(tmp, "diagram.json")
        svg_path = os.path.join(tmp, "diagram.svg")
        status, _, text = _run("complete", "--quiver", preset_path("kronecker1"), "--order", 4, "--output", dump_path)
        assert status == cli.EXIT_OK and text == ""
        status, data, _ = _run("export", "--diagram", dump_path, "--svg", svg_path)
        assert status == cli.EXIT_OK
        assert data["walls"] == 3
        with open(svg_path, encoding="utf-8") as f:
            assert "<svg" in f.read()


def main():
    """メイン実行関数"""
    tests = [
        ("complete コマンド", test_complete_kronecker1),
        ("出力の決定性", test_output_is_deterministic),
        ("dt コマンド", test_dt_command),
        ("不正な入力", test_invalid_inputs_exit_with_one),
        ("引数の誤り", test_argument_errors_exit_with_one),
        ("localp2 コマンド", test_localp2_command),
        ("verify コマンド", test_verify_commands),
        ("hdtv コマンド", test_hdtv_command),
        ("pullback コマンド", test_pullback_command),
        ("--bundle の読み込み", test_bundle_flag),
        ("SVG の書き出し", test_export_svg),
    ]
    return run_suite("コマンドラインテスト", tests)


if __name__ == "__main__":
    main()
