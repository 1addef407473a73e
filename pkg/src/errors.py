"""
エンジン全体で使う例外クラス

すべて ValueError の派生なので、呼び出し側は従来どおり ValueError で捕捉できる。
"""

from typing import List, Optional, Sequence


class EngineError(ValueError):
    """エンジン例外の基底クラス"""

    kind = "engine"


class DimensionError(EngineError):
    """ベクトル・行列の長さ不一致"""

    kind = "dimension"


class DomainError(EngineError):
    """演算の定義域外の入力"""

    kind = "domain"


class SeriesContextError(EngineError):
    """異なる指数コンテキストの級数を混ぜた"""

    kind = "series-context"


class HypothesisError(EngineError):
    """
    理論の仮定が満たされていない

    Args:
        message: 説明
        condition: 破られた条件（原文どおりに引用する）
    """

    kind = "hypothesis"

    def __init__(self, message: str, condition: str = ""):
        self.condition = condition
        if condition and condition not in message:
            message = f'{message} (condition: "{condition}")'
        super().__init__(message)


class SingularPointError(EngineError):
    """点が Sing(D) に含まれる"""

    kind = "singular-point"

    def __init__(self, message: str, walls: Sequence[str] = ()):
        self.walls: List[str] = list(walls)
        if self.walls:
            message = f"{message}; offending walls: {', '.join(self.walls)}"
        super().__init__(message)


class NonTransverseCrossingError(EngineError):
    """経路が壁に接している"""

    kind = "non-transverse"


class NonCentralSupportError(EngineError):
    """原点を通らないサポート"""

    kind = "non-central"


class ExperimentalModeError(EngineError):
    """階数3以上の補完が無効化されている"""

    kind = "experimental"


class SchemaError(EngineError):
    """
    入力ファイルの書式エラー

    Args:
        message: 説明
        path: ファイルパス
        field: フィールドの位置（例: "seed.e_vectors[2]"）
        line: 分かる場合は行番号
    """

    kind = "schema"

    def __init__(self, message: str, path: Optional[str] = None, field: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.field = field
        self.line = line
        where = []
        if path:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        if where:
            message = f"{message} [{', '.join(where)}]"
        super().__init__(message)


class ConsistencyError(RuntimeError):
    """補完アルゴリズム内部の不変条件が破れた"""

    kind = "consistency"
