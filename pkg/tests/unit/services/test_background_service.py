"""Unit tests for BackgroundService"""

from unittest.mock import MagicMock, patch

import pytest

from domain.entities.exceptions import IntegrationException
from domain.entities.scenario import Scenario
from domain.entities.types import DecoderType, StopRule
from domain.services.background_service import BackgroundService, celery_app, simulate_batch
from domain.services.simulation_service import SimulationService, execute_batch, scenario_to_payload


@pytest.fixture
def background_service():
    """Create BackgroundService instance for testing"""
    return BackgroundService(timeout=5)


@pytest.fixture
def payload(small_spec):
    scenario = Scenario(code=small_spec, decoder=DecoderType.SC, snr_db=[0.0],
                        stop=StopRule(min_errors=10**6, max_trials=60), seed=11)
    return scenario_to_payload(scenario)


@pytest.fixture
def eager_celery():
    """Run tasks in-process"""
    celery_app.conf.task_always_eager = True
    celery_app.conf.task_eager_propagates = True
    yield celery_app
    celery_app.conf.task_always_eager = False
    celery_app.conf.task_eager_propagates = False


class TestRunBatches:
    """Test batch submission and collection"""

    def test_results_in_submission_order(self, background_service, payload):
        """Test results follow the order of the submitted items"""
        first, second = MagicMock(), MagicMock()
        first.get.return_value = [3, 1]
        second.get.return_value = [5, 0]
        with patch("domain.services.background_service.simulate_batch") as mock_task:
            mock_task.apply_async.side_effect = [first, second]
            results = background_service.run_batches(payload, [(0, 0.0, 0, 10), (0, 0.0, 10, 10)])

        assert results == [(3, 1), (5, 0)]
        mock_task.apply_async.assert_any_call(args=[payload, 0, 0.0, 10, 10])
        first.get.assert_called_once_with(timeout=5)

    def test_queue_failure(self, background_service, payload):
        """Test broker errors become IntegrationException"""
        with patch("domain.services.background_service.simulate_batch") as mock_task:
            mock_task.apply_async.side_effect = ConnectionError("broker down")
            with pytest.raises(IntegrationException) as exc_info:
                background_service.run_batches(payload, [(0, 0.0, 0, 10)])
        assert "Queueing failed" in exc_info.value.message

    def test_worker_failure(self, background_service, payload):
        """Test a failed batch becomes IntegrationException"""
        broken = MagicMock()
        broken.get.side_effect = RuntimeError("worker lost")
        with patch("domain.services.background_service.simulate_batch") as mock_task:
            mock_task.apply_async.return_value = broken
            with pytest.raises(IntegrationException):
                background_service.run_batches(payload, [(0, 0.0, 0, 10)])


class TestSimulateBatchTask:
    """Test the Celery task itself"""

    def test_eager_task_matches_local(self, eager_celery, payload):
        """Test the task returns the in-process counts"""
        result = simulate_batch.apply_async(args=[payload, 0, 0.0, 0, 20]).get()
        assert tuple(result) == execute_batch(payload, 0, 0.0, 0, 20)

    def test_celery_backend_matches_local(self, eager_celery, small_spec):
        """Test run_bler gives identical counts on both back ends"""
        service = SimulationService()
        scenario = Scenario(code=small_spec, decoder=DecoderType.SC, snr_db=[0.0, 2.0],
                            stop=StopRule(min_errors=10**6, max_trials=50), seed=5)
        local = service.run_bler(scenario, batch_size=20)
        remote = service.run_bler(scenario, batch_size=20, backend="celery")
        assert [e.block_errors for e in local] == [e.block_errors for e in remote]
        assert [e.trials for e in remote] == [50, 50]

    def test_task_route(self):
        """Test batches go to the simulation queue"""
        routes = celery_app.conf.task_routes
        assert routes["domain.services.background_service.simulate_batch"] == {"queue": "simulation"}
