import logging
import time
import uuid
from typing import Any, Dict, Optional

import httpx
import numpy as np

from src.config import settings
from src.errors import ProviderUnavailable

logger = logging.getLogger(__name__)

MAX_LOG_TEXT = 500


def _jsonable(obj: Any) -> Any:
    """Converts numpy arrays and scalars inside a request payload to plain JSON values."""
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


class FeatureHttpClient:
    """
    Обёртка над httpx для удалённого сервиса визуальных признаков.
    Каждый запрос получает X-Request-ID и логируется вместе со временем ответа;
    транспортные ошибки превращаются в ProviderUnavailable.
    """

    def __init__(
        self,
        base_url: Optional[str] = None,
        timeout: Optional[float] = None,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.base_url = (base_url or settings.feature_service_url or "").rstrip("/")
        self.timeout = httpx.Timeout(timeout if timeout is not None else settings.feature_service_timeout)
        self.transport = transport

    def request(
        self,
        method: str,
        path: str,
        json: Optional[Dict[str, Any]] = None,
        params: Optional[Dict[str, Any]] = None,
    ) -> httpx.Response:
        if not self.base_url:
            raise ProviderUnavailable("feature service URL is not configured (FEATURE_SERVICE_URL)")

        req_id = str(uuid.uuid4())
        payload = _jsonable(json) if json is not None else None
        # payloads carry feature matrices; only the scalar fields go to the log
        summary = {k: v for k, v in (payload or {}).items() if not isinstance(v, list)}

        with httpx.Client(base_url=self.base_url, timeout=self.timeout, transport=self.transport) as c:
            logger.info("Features → %s %s | req_id=%s | params=%s | body=%s",
                        method.upper(), path, req_id, params, summary)
            started = time.perf_counter()
            try:
                resp = c.request(method, path, json=payload, params=params, headers={"X-Request-ID": req_id})
            except httpx.HTTPError as e:
                logger.exception("Features transport error | req_id=%s | %s %s | error=%s",
                                 req_id, method.upper(), path, e)
                raise ProviderUnavailable(f"feature service unreachable ({method.upper()} {path}): {e}") from e
            elapsed_ms = (time.perf_counter() - started) * 1000.0

            if resp.status_code >= 400:
                logger.error("Features ← %s %s %s | req_id=%s | %.0f ms | body=%s",
                             resp.status_code, method.upper(), path, req_id, elapsed_ms,
                             (resp.text or "")[:MAX_LOG_TEXT])
            else:
                logger.info("Features ← %s %s %s | req_id=%s | %.0f ms | bytes=%d",
                            resp.status_code, method.upper(), path, req_id, elapsed_ms, len(resp.content))
            return resp
