"""KEGG REST client: rate limiting, retries, on-disk cache and offline fallback."""

import json
import math
import re
import threading
import time
from collections import deque
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional

import requests
from tenacity import (
    RetryError,
    Retrying,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from src.pathwise.annotation.flatfile import parse_kegg_entry
from src.pathwise.annotation.offline import load_annotation_table
from src.pathwise.annotation.records import AnnotationRecord, AnnotationSource, unannotated_record
from src.pathwise.config import KeggConfig, config, env_flag
from src.pathwise.exceptions import AnnotationError
from src.pathwise.profiles.tables import FeatureKind
from src.pathwise.utils.formatting import atomic_write_text
from src.pathwise.utils.logger import get_logger

logger = get_logger(__name__)

PATHWAY_ID = re.compile(r"^ko\d{5}$")
USER_AGENT = "pathwise-kegg-client"


class ServerError(Exception):
    """HTTP 5xx from KEGG."""


class NetworkUnavailable(Exception):
    """The network is disabled or failed after every retry."""


class RateLimiter:
    """
    Sliding-window limiter shared across threads: at most ``floor(rate)`` call
    starts in any window of ``floor(rate) / rate`` seconds (one second for
    whole rates). :meth:`drain` blocks until the newest start has left the
    window.
    """

    def __init__(
        self,
        rate_per_second: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate_per_second <= 0:
            raise ValueError("rate_per_second must be positive")
        self.max_calls = max(1, math.floor(rate_per_second))
        self.period = self.max_calls / rate_per_second
        self._clock = clock
        self._sleep = sleep
        self._lock = threading.Lock()
        self._starts: deque[float] = deque(maxlen=self.max_calls)

    def acquire(self) -> None:
        with self._lock:
            now = self._clock()
            if len(self._starts) == self.max_calls:
                opens_at = self._starts[0] + self.period
                if now < opens_at:
                    self._sleep(opens_at - now)
                    now = opens_at
            self._starts.append(now)

    def drain(self) -> None:
        with self._lock:
            if not self._starts:
                return
            remaining = self._starts[-1] + self.period - self._clock()
            if remaining > 0:
                self._sleep(remaining)
            self._starts.clear()


class KeggRestClient:
    """
    Fetches ``/get/<pathway id>`` records.

    The cache is consulted first. Connection errors, timeouts and 5xx responses
    are retried with exponential backoff; a 404 yields an unannotated record and
    is never cached.
    """

    def __init__(
        self,
        kegg_config: Optional[KeggConfig] = None,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.monotonic,
        network_enabled: Optional[bool] = None,
    ):
        self.config = kegg_config or config.kegg
        self.session = session or requests.Session()
        self.session.headers.update({"User-Agent": USER_AGENT})
        self.cache_dir = Path(self.config.cache_dir)
        self.limiter = RateLimiter(self.config.rate_limit_per_second, clock=clock, sleep=sleep)
        self._sleep = sleep
        if network_enabled is None:
            network_enabled = self.config.network_enabled and not env_flag("PATHWISE_NO_NETWORK")
        self.network_enabled = network_enabled
        self.requests_made = 0

    def url_for(self, pathway_id: str) -> str:
        return f"{self.config.base_url.rstrip('/')}/get/{pathway_id}"

    def cache_paths(self, pathway_id: str) -> tuple[Path, Path]:
        return self.cache_dir / f"{pathway_id}.txt", self.cache_dir / f"{pathway_id}.json"

    def read_cache(self, pathway_id: str) -> Optional[AnnotationRecord]:
        body_path, meta_path = self.cache_paths(pathway_id)
        if not body_path.is_file():
            return None
        fetched_at = None
        if meta_path.is_file():
            stamp = json.loads(meta_path.read_text(encoding="utf-8")).get("fetched_at")
            fetched_at = datetime.fromisoformat(stamp) if stamp else None
        logger.bind(id=pathway_id).debug("KEGG cache hit")
        return parse_kegg_entry(pathway_id, body_path.read_text(encoding="utf-8"), fetched_at)

    def write_cache(self, pathway_id: str, body: str, fetched_at: datetime) -> None:
        body_path, meta_path = self.cache_paths(pathway_id)
        atomic_write_text(body_path, body)
        sidecar = {"id": pathway_id, "url": self.url_for(pathway_id), "fetched_at": fetched_at.isoformat()}
        atomic_write_text(meta_path, json.dumps(sidecar, indent=2, sort_keys=True) + "\n")

    def _request(self, url: str) -> Optional[str]:
        self.limiter.acquire()
        self.requests_made += 1
        response = self.session.get(url, timeout=self.config.timeout)
        if response.status_code == 404:
            return None
        if response.status_code >= 500:
            raise ServerError(f"HTTP {response.status_code} from {url}")
        if response.status_code >= 400:
            raise AnnotationError(f"HTTP {response.status_code} from {url}")
        return response.text

    def download(self, pathway_id: str) -> Optional[str]:
        """
        GET the record body with retries.

        Returns:
            The body, or None on 404

        Raises:
            NetworkUnavailable: network disabled or still failing after retries
        """
        if not self.network_enabled:
            raise NetworkUnavailable("network access is disabled")
        url = self.url_for(pathway_id)
        retrying = Retrying(
            retry=retry_if_exception_type((requests.ConnectionError, requests.Timeout, ServerError)),
            stop=stop_after_attempt(self.config.max_retries + 1),
            wait=wait_exponential(multiplier=self.config.backoff_seconds),
            sleep=self._sleep,
            before_sleep=lambda state: logger.bind(
                id=pathway_id, attempt=state.attempt_number
            ).warning("KEGG request failed; retrying"),
        )
        try:
            return retrying(self._request, url)
        except RetryError as exc:
            raise NetworkUnavailable(str(exc.last_attempt.exception())) from exc

    def close(self) -> None:
        """Wait out the open rate-limit window so a following client starts clean."""
        self.limiter.drain()

    def get_entry(self, pathway_id: str) -> AnnotationRecord:
        """
        Annotation for one KEGG pathway.

        Raises:
            AnnotationError: invalid id, unexpected 4xx, or an unparseable body
            NetworkUnavailable: see :meth:`download`
        """
        if not PATHWAY_ID.match(pathway_id):
            raise AnnotationError(f"'{pathway_id}' is not a KEGG pathway id (ko#####)")
        cached = self.read_cache(pathway_id)
        if cached is not None:
            return cached

        body = self.download(pathway_id)
        if body is None:
            logger.bind(id=pathway_id).warning("KEGG entry not found")
            return unannotated_record(pathway_id, AnnotationSource.KEGG_REST)
        fetched_at = datetime.now(timezone.utc)
        record = parse_kegg_entry(pathway_id, body, fetched_at)
        self.write_cache(pathway_id, body, fetched_at)
        return record


def fetch_kegg_entry(
    pathway_id: str,
    kegg_config: Optional[KeggConfig] = None,
    client: Optional[KeggRestClient] = None,
) -> AnnotationRecord:
    """
    Fetch one pathway record, falling back to the bundled table when the
    network is unavailable.
    """
    client = client or KeggRestClient(kegg_config)
    try:
        return client.get_entry(pathway_id)
    except NetworkUnavailable as exc:
        logger.bind(id=pathway_id, reason=str(exc)).warning(
            "KEGG unavailable; using the offline annotation table"
        )
        return load_annotation_table(FeatureKind.KEGG_PATHWAY).lookup(pathway_id)
