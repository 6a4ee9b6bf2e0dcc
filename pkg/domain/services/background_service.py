"""Distributed simulation batches with Celery"""

import logging
from typing import Any, Dict, List, Tuple

from celery import Celery

from ..entities.exceptions import BaseFecException, IntegrationException
from shared.config.settings import settings

logger = logging.getLogger(__name__)

# Initialize Celery app
celery_app = Celery(
    settings.app_name,
    broker=settings.redis_url,
    backend=settings.redis_url,
    include=["domain.services.background_service"],
)

celery_app.conf.update(
    task_serializer="json",
    accept_content=["json"],
    result_serializer="json",
    timezone="UTC",
    enable_utc=True,
    task_routes={
        "domain.services.background_service.simulate_batch": {"queue": "simulation"},
    },
)


class BackgroundService:
    """
    Runs simulation batches on a Celery worker pool.
    Results are collected in submission order.
    """

    def __init__(self, timeout: float = None):
        self.timeout = timeout

    def run_batches(self, payload: Dict[str, Any],
                    items: List[Tuple[int, float, int, int]]) -> List[Tuple[int, int]]:
        try:
            pending = [simulate_batch.apply_async(args=[payload, *item]) for item in items]
        except Exception as e:
            logger.error(f"Failed to queue simulation batches: {e}")
            raise IntegrationException(f"Queueing failed: {e}")

        results = []
        for item, task in zip(items, pending):
            try:
                outcome = task.get(timeout=self.timeout)
            except BaseFecException:
                raise
            except Exception as e:
                logger.error(f"Simulation batch failed: {e}", extra={"task_id": task.id, "start": item[2]})
                raise IntegrationException(f"Simulation batch {item[2]}+{item[3]} failed: {e}")
            results.append((int(outcome[0]), int(outcome[1])))
        logger.debug("Simulation wave collected", extra={"batches": len(items)})
        return results

    def batch_dispatcher(self, payload: Dict[str, Any]) -> "_CeleryDispatcher":
        return _CeleryDispatcher(self, payload)


class _CeleryDispatcher:
    def __init__(self, service: BackgroundService, payload: Dict[str, Any]):
        self.service = service
        self.payload = payload

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False

    def __call__(self, wave):
        return self.service.run_batches(self.payload, wave)


@celery_app.task(bind=True, max_retries=3, default_retry_delay=10)
def simulate_batch(self, payload: Dict[str, Any], snr_index: int, es_over_n0_db: float,
                   start: int, count: int) -> List[int]:
    """Run trials [start, start + count) of one SNR point; returns [errors, ml_lb_events]"""
    from .simulation_service import execute_batch

    try:
        errors, ml_lb = execute_batch(payload, snr_index, es_over_n0_db, start, count)
    except BaseFecException:
        raise
    except Exception as e:
        logger.error(f"Simulation batch crashed: {e}", extra={"start": start, "count": count})
        if self.request.retries < self.max_retries:
            raise self.retry(exc=e, countdown=10 * (2 ** self.request.retries))
        raise
    return [errors, ml_lb]
