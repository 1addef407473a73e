import json
import logging
import threading
import time
from typing import Any, Dict, Optional

from src.completion import complete
from src.scattering import ScatteringDiagram, dump

logger = logging.getLogger(__name__)


class BaseModule:
    """
    散乱図式エンジンの構成要素の基本クラス
    クイバー側（QuiverDT）とシード側（HDTV）の基底クラス

    補完済みの図式を初期図式の内容をキーにしてキャッシュする。キャッシュより
    低い次数の問い合わせは切り詰めて返し、再計算しない。
    """

    DEFAULT_ORDER = 6

    def __init__(self, name: str = "BaseModule"):
        self.name = name
        self.is_active = False

        # パラメータの定義
        self.parameters: Dict[str, Any] = {}

        # 初期図式の内容 -> 補完済み図式
        self._cache: Dict[str, ScatteringDiagram] = {}
        self._lock = threading.Lock()

        # 最後に更新された時刻
        self.last_update = time.time()

        self.set_parameter("order", self.DEFAULT_ORDER)
        self.set_parameter("experimental", False)
        self.set_parameter("sample_seed", 0)
        self.set_parameter("sample_size", 4)

    def set_parameter(self, param_name: str, value: Any):
        """
        パラメータを設定

        Args:
            param_name: パラメータ名
            value: 設定値
        """
        self.parameters[param_name] = value
        logger.info(f"Set {self.name}.{param_name} = {value}")

    def get_parameter(self, param_name: str, default_value: Any = 0):
        """
        パラメータを取得

        Args:
            param_name: パラメータ名
            default_value: デフォルト値

        Returns:
            パラメータ値
        """
        return self.parameters.get(param_name, default_value)

    def start(self):
        """
        構成要素の処理を開始
        """
        if not self.is_active:
            self.is_active = True
            self._initialize()
            logger.info(f"{self.name} started")

    def stop(self):
        """
        構成要素の処理を停止
        """
        if self.is_active:
            self.is_active = False
            self._cleanup()
            logger.info(f"{self.name} stopped")

    def _initialize(self):
        """
        開始処理 - 前回の実行の結果を捨てる
        """
        self._reset()

    def _cleanup(self):
        """
        終了処理 - キャッシュを空にする
        """
        self._reset()

    def _reset(self):
        with self._lock:
            self._cache.clear()

    def initial_diagram(self) -> ScatteringDiagram:
        """
        初期図式（子クラスで実装）
        """
        raise NotImplementedError("initial_diagram method must be implemented by subclass")

    def _cache_key(self, initial: ScatteringDiagram, experimental: bool) -> str:
        walls = dump(initial)["walls"]
        return json.dumps({"context": initial.context.to_dict(), "walls": walls, "experimental": experimental}, sort_keys=True)

    def process(self, order: Optional[int] = None) -> ScatteringDiagram:
        """
        補完済みの図式を返す

        Args:
            order: 次数（省略時はパラメータ order）
        """
        order = self.get_parameter("order") if order is None else order
        experimental = bool(self.get_parameter("experimental", False))
        initial = self.initial_diagram()
        key = self._cache_key(initial, experimental)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None and cached.order >= order:
            logger.info(f"{self.name} cache hit at order {order} (cached order {cached.order})")
            return cached if cached.order == order else cached.truncate(order)
        logger.info(f"{self.name} cache miss at order {order}")
        diagram = complete(initial, order, experimental=experimental)
        with self._lock:
            current = self._cache.get(key)
            if current is None or current.order < diagram.order:
                self._cache[key] = diagram
        self.last_update = time.time()
        return diagram

    def cached_order(self) -> Optional[int]:
        with self._lock:
            orders = [d.order for d in self._cache.values()]
        return max(orders) if orders else None

    def get_info(self) -> Dict[str, Any]:
        """
        構成要素の情報を取得

        Returns:
            情報の辞書
        """
        return {
            "name": self.name,
            "is_active": self.is_active,
            "parameters": dict(self.parameters),
            "cached_order": self.cached_order(),
            "last_update": self.last_update,
        }

    def __str__(self) -> str:
        return f"{self.__class__.__name__}({self.name})"

    def __repr__(self) -> str:
        return self.__str__()
