"""Shared HTTP plumbing: retrying JSON POSTs and a per-endpoint rate cap.

Retry policy: a fixed number of attempts (default 3) with exponential
backoff and no jitter, so test runs are deterministic. Exhausted retries
raise EndpointUnreachable; a 2xx body that is not JSON raises
MalformedResponse with a payload excerpt.
"""

from __future__ import annotations

import logging
import time

import requests

from .errors import EndpointUnreachable, MalformedResponse

logger = logging.getLogger(__name__)

DEFAULT_ATTEMPTS = 3
DEFAULT_TIMEOUT = 30.0


class RateLimiter:
    """Caps calls to a minimum interval; 0 or None disables the cap."""

    def __init__(self, per_second: float | None) -> None:
        self._interval = 1.0 / per_second if per_second else 0.0
        self._last = 0.0

    def wait(self) -> None:
        if self._interval <= 0:
            return
        now = time.monotonic()
        remaining = self._last + self._interval - now
        if remaining > 0:
            time.sleep(remaining)
        self._last = time.monotonic()


def request_json(
    method: str,
    url: str,
    *,
    session: requests.Session | None = None,
    json_body: dict | None = None,
    params: dict | None = None,
    headers: dict | None = None,
    attempts: int = DEFAULT_ATTEMPTS,
    timeout: float = DEFAULT_TIMEOUT,
    backoff_base: float = 0.5,
    rate: RateLimiter | None = None,
) -> dict:
    """Issue a JSON request with retries; return the decoded JSON body."""
    http = session or requests
    last_error: Exception | None = None
    for attempt in range(attempts):
        if rate is not None:
            rate.wait()
        try:
            response = http.request(
                method,
                url,
                json=json_body,
                params=params,
                headers=headers,
                timeout=timeout,
            )
            response.raise_for_status()
        except requests.RequestException as exc:
            last_error = exc
            wait = backoff_base * (2**attempt)
            logger.warning(
                "request to %s failed (attempt %d/%d): %s", url, attempt + 1, attempts, exc
            )
            if attempt + 1 < attempts:
                time.sleep(wait)
            continue
        try:
            return response.json()
        except ValueError as exc:
            raise MalformedResponse(
                f"non-JSON response from {url}: {response.text[:200]!r}"
            ) from exc
    raise EndpointUnreachable(f"{url} failed after {attempts} attempts: {last_error}")


def post_json(url: str, payload: dict, **kwargs) -> dict:
    return request_json("POST", url, json_body=payload, **kwargs)


def get_json(url: str, **kwargs) -> dict:
    return request_json("GET", url, **kwargs)
