"""Monte Carlo BLER estimation over BI-AWGN with ML-lower-bound tracking"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import TypeAdapter, ValidationError

from ..entities.code import CodeSpec, InterleaverSet
from ..entities.exceptions import ValidationException
from ..entities.outer import ConcatScheme, OuterCodeSpec
from ..entities.polynomials import WeightPoly
from ..entities.scenario import Scenario, ScenarioDocument
from ..entities.types import (
    BlerEstimate,
    ChannelParams,
    DecoderType,
    SimBackend,
    SnrPoint,
    StopRule,
)
from ..repositories.artifact_repository import IArtifactRepository
from .bound_service import BoundService
from .decoder_service import DecoderService
from .outer_code_service import OuterCodeService
from .polar_service import PolarService, build_code_spec, build_interleaver_set
from shared.config.settings import settings
from shared.utils.digest import config_digest

logger = logging.getLogger(__name__)

_outer_adapter = TypeAdapter(OuterCodeSpec)


def wilson_interval(k: int, n: int, z: float = 1.96) -> Tuple[float, float]:
    """Wilson score interval for k successes in n trials"""
    if n <= 0:
        return 0.0, 1.0
    if not 0 <= k <= n:
        raise ValidationException(f"need 0 <= k <= n, got k={k}, n={n}")
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (p + z2 / (2.0 * n)) / denom
    half = z / denom * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    return max(0.0, center - half), min(1.0, center + half)


def trial_generator(seed: int, snr_index: int, trial_index: int) -> np.random.Generator:
    """Counter-based stream: one Philox block per (seed, snr point, trial)"""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, snr_index, trial_index]))


# Worker payloads: plain JSON so batches can cross process and broker boundaries

def _code_payload(spec: CodeSpec) -> Dict[str, Any]:
    return {"m_exp": spec.m_exp, "unfrozen": list(spec.unfrozen)}


def _ils_payload(ils: InterleaverSet) -> Dict[str, Any]:
    return {
        "m_exp": ils.m_exp,
        "seed": ils.seed,
        "perms": {f"{m},{j}": list(p) for (m, j), p in sorted(ils.perms.items())},
    }


def _ils_from_payload(data: Dict[str, Any]) -> InterleaverSet:
    perms = {}
    for key, values in data["perms"].items():
        m, j = key.split(",")
        perms[(int(m), int(j))] = tuple(values)
    return build_interleaver_set(int(data["m_exp"]), perms, seed=data.get("seed"))


def scenario_to_payload(scenario: Scenario) -> Dict[str, Any]:
    payload = {
        "name": scenario.name,
        "decoder": scenario.decoder.value,
        "list_size": scenario.list_size,
        "snr_db": list(scenario.snr_db),
        "snr_type": scenario.snr_type.value,
        "stop": scenario.stop.model_dump(),
        "seed": scenario.seed,
        "code": _code_payload(scenario.code) if scenario.code is not None else None,
        "interleavers": _ils_payload(scenario.interleavers) if scenario.interleavers is not None else None,
        "concat": None,
    }
    if scenario.concat is not None:
        scheme = scenario.concat
        payload["concat"] = {
            "outer": scheme.outer.model_dump(mode="json"),
            "p": scheme.p,
            "q": scheme.q,
            "inner": _code_payload(scheme.inner),
            "inner_interleavers": [_ils_payload(i) for i in scheme.inner_interleavers],
            "outer_perm": list(scheme.outer_perm),
        }
    payload["digest"] = config_digest(payload)
    return payload


def scenario_from_payload(payload: Dict[str, Any]) -> Scenario:
    try:
        concat = None
        if payload.get("concat"):
            c = payload["concat"]
            concat = ConcatScheme(
                outer=_outer_adapter.validate_python(c["outer"]),
                p=c["p"],
                q=c["q"],
                inner=build_code_spec(c["inner"]["m_exp"], c["inner"]["unfrozen"]),
                inner_interleavers=[_ils_from_payload(i) for i in c["inner_interleavers"]],
                outer_perm=tuple(c["outer_perm"]),
            )
        code = payload.get("code")
        ils = payload.get("interleavers")
        return Scenario(
            name=payload["name"],
            code=build_code_spec(code["m_exp"], code["unfrozen"]) if code else None,
            interleavers=_ils_from_payload(ils) if ils else None,
            concat=concat,
            decoder=DecoderType(payload["decoder"]),
            list_size=payload["list_size"],
            snr_db=payload["snr_db"],
            snr_type=payload["snr_type"],
            stop=StopRule(**payload["stop"]),
            seed=payload["seed"],
        )
    except (ValidationError, KeyError) as e:
        raise ValidationException(f"malformed scenario payload: {e}")


class _TrialRunner:
    """Encode -> channel -> decode for a contiguous range of trials"""

    def __init__(self, scenario: Scenario, polar_service: PolarService,
                 decoder_service: DecoderService, outer_code_service: OuterCodeService):
        self.scenario = scenario
        self.polar_service = polar_service
        self.decoder_service = decoder_service
        self.outer_code_service = outer_code_service

    def run(self, snr_index: int, es_over_n0_db: float, start: int, count: int) -> Tuple[int, int]:
        sc = self.scenario
        noiseless = math.isinf(es_over_n0_db) and es_over_n0_db > 0
        params = None if noiseless else ChannelParams.from_esn0_db(es_over_n0_db)
        msg_len = sc.message_len if sc.concat is None else sc.concat.overall_k
        n = sc.block_len
        msgs = np.empty((count, msg_len), dtype=np.uint8)
        noise = np.empty((count, n))
        for t in range(count):
            rng = trial_generator(sc.seed, snr_index, start + t)
            msgs[t] = rng.integers(0, 2, size=msg_len, dtype=np.uint8)
            noise[t] = rng.standard_normal(n)
        if sc.decoder is DecoderType.UNCODED:
            return self._uncoded(msgs, noise, params)
        if sc.concat is not None:
            return self._concat(msgs, noise, params)
        return self._plain(msgs, noise, params)

    def _llr(self, codewords: np.ndarray, noise: np.ndarray, params: Optional[ChannelParams]) -> np.ndarray:
        symbols = 1.0 - 2.0 * codewords
        if params is None:
            return symbols * settings.llr_saturation
        y = math.sqrt(params.es) * symbols + params.noise_std * noise
        return params.llr_scale * y

    def _uncoded(self, msgs, noise, params) -> Tuple[int, int]:
        llr = self._llr(msgs.astype(float), noise, params)
        decided = (llr < 0).astype(np.uint8)
        return int(np.count_nonzero(decided[:, 0] != msgs[:, 0])), 0

    def _plain(self, msgs, noise, params) -> Tuple[int, int]:
        sc = self.scenario
        code, ils = sc.code, sc.interleavers
        words = self._encode(msgs)
        llr = self._llr(words.astype(float), noise, params)
        if sc.decoder is DecoderType.SC:
            decoded, dec_words = self.decoder_service.sc_decode(llr, code, ils, return_codeword=True)
        elif sc.decoder is DecoderType.SCL:
            paths, _, path_words = self.decoder_service.scl_decode_batch(llr, code, ils, sc.list_size)
            decoded, dec_words = paths[:, 0], path_words[:, 0]
        else:
            encoder = self.polar_service.encoder_for(code, ils)
            decoded = np.stack([
                self.decoder_service.ml_decode_bruteforce(row, encoder, code.dimension) for row in llr
            ])
            dec_words = encoder(decoded)
        wrong = np.any(decoded != msgs, axis=1)
        ml_lb = sum(
            self.decoder_service.ml_lb_event(dec_words[t], words[t], llr[t])
            for t in np.flatnonzero(wrong)
        )
        return int(wrong.sum()), int(ml_lb)

    def _encode(self, msgs: np.ndarray) -> np.ndarray:
        sc = self.scenario
        if sc.interleavers is None:
            return self.polar_service.polar_encode(msgs, sc.code)
        return self.polar_service.ipolar_encode(msgs, sc.code, sc.interleavers)

    def _concat(self, msgs, noise, params) -> Tuple[int, int]:
        sc = self.scenario
        scheme = sc.concat
        outer_msgs = msgs.reshape(len(msgs), scheme.p, scheme.outer_k)
        _, words = self.outer_code_service.concat_encode(outer_msgs, scheme)
        llr = self._llr(words.astype(float), noise.reshape(words.shape), params)
        list_size = 1 if sc.decoder is DecoderType.SC else sc.list_size
        detector = self.outer_code_service.detector(scheme)
        errors = ml_lb = 0
        for t in range(len(msgs)):
            result = self.decoder_service.concat_decode(llr[t], scheme, list_size, detector=detector)
            if np.array_equal(result.message, outer_msgs[t]):
                continue
            errors += 1
            if result.passed and self.decoder_service.ml_lb_event(result.codewords, words[t], llr[t]):
                ml_lb += 1
        return errors, ml_lb


_runner_cache: Dict[str, _TrialRunner] = {}


def execute_batch(payload: Dict[str, Any], snr_index: int, es_over_n0_db: float,
                  start: int, count: int) -> Tuple[int, int]:
    """
    Worker entry point: (block errors, ML-lower-bound events) for trials
    [start, start + count) of one SNR point.
    """
    key = payload.get("digest") or config_digest(payload)
    runner = _runner_cache.get(key)
    if runner is None:
        polar = PolarService()
        outer = OuterCodeService(polar)
        runner = _TrialRunner(scenario_from_payload(payload), polar, DecoderService(polar, outer), outer)
        _runner_cache.clear()
        _runner_cache[key] = runner
    return runner.run(snr_index, es_over_n0_db, start, count)


class SimulationService:
    """BLER estimation: encode, transmit over BI-AWGN, decode, compare"""

    def __init__(self, polar_service: Optional[PolarService] = None,
                 outer_code_service: Optional[OuterCodeService] = None,
                 decoder_service: Optional[DecoderService] = None,
                 bound_service: Optional[BoundService] = None):
        self.polar_service = polar_service or PolarService()
        self.outer_code_service = outer_code_service or OuterCodeService(self.polar_service)
        self.decoder_service = decoder_service or DecoderService(self.polar_service, self.outer_code_service)
        self.bound_service = bound_service or BoundService()

    def awgn_llr(self, codeword, params: ChannelParams, rng: np.random.Generator) -> np.ndarray:
        """y = sqrt(Es)(1 - 2c) + w, LLR = 4 sqrt(Es) y / N0"""
        c = np.asarray(codeword, dtype=float)
        y = math.sqrt(params.es) * (1.0 - 2.0 * c) + params.noise_std * rng.standard_normal(c.shape)
        return params.llr_scale * y

    def wilson_interval(self, k: int, n: int, z: float = 1.96) -> Tuple[float, float]:
        return wilson_interval(k, n, z)

    def build_scenario(self, document: ScenarioDocument, repository: IArtifactRepository,
                       base_path: str = ".") -> Scenario:
        """Resolve a scenario document's file references and seeds"""
        code = ils = concat = None
        if document.code_file:
            code = repository.load_code_spec(repository.resolve(base_path, document.code_file))
        if document.interleaver_file:
            ils = repository.load_interleavers(repository.resolve(base_path, document.interleaver_file))
        elif document.interleaver_seed is not None and code is not None:
            ils = self.polar_service.sample_interleavers(code.m_exp, document.interleaver_seed)
        outer = document.outer
        if document.outer_file:
            outer = repository.load_outer_spec(repository.resolve(base_path, document.outer_file))
        if outer is not None:
            if code is None:
                raise ValidationException("a concatenated scenario needs an inner code_file")
            inner_ils = [ils] * document.q if ils is not None and document.q == 1 else None
            concat = self.outer_code_service.build_concat_scheme(
                outer, code, p=document.p, q=document.q,
                interleaver_seed=document.interleaver_seed if inner_ils is None else None,
                outer_perm_seed=document.outer_perm_seed,
                inner_interleavers=inner_ils,
            )
        try:
            return Scenario(
                name=document.name,
                code=code,
                interleavers=ils,
                concat=concat,
                decoder=document.decoder,
                list_size=document.list_size,
                snr_db=document.snr_db,
                snr_type=document.snr_type,
                stop=document.stop,
                seed=document.seed,
            )
        except ValidationError as e:
            raise ValidationException(f"invalid scenario '{document.name}': {e.errors()[0]['msg']}")

    def run_bler(
        self,
        scenario: Scenario,
        snr_db: Optional[Sequence[float]] = None,
        stop: Optional[StopRule] = None,
        jobs: Optional[int] = None,
        backend: Optional[str] = None,
        batch_size: Optional[int] = None,
        wef: Optional[WeightPoly] = None,
    ) -> List[BlerEstimate]:
        """
        One BlerEstimate per SNR point. Trials run in fixed-size batches;
        batches are aggregated in index order and the stop rule is checked
        after each one, so counts do not depend on the worker count.
        With a WEF, union and simple bound columns are filled in.
        """
        grid = list(snr_db) if snr_db is not None else list(scenario.snr_db)
        if not grid:
            raise ValidationException("snr grid must not be empty")
        stop = stop or scenario.stop
        jobs = max(1, jobs or settings.sim_jobs)
        batch_size = batch_size or settings.sim_batch_size
        if batch_size < 1:
            raise ValidationException(f"batch size must be >= 1, got {batch_size}")
        try:
            backend = SimBackend(backend or settings.sim_backend)
        except ValueError:
            raise ValidationException(f"unknown simulation back end '{backend or settings.sim_backend}'")
        payload = scenario_to_payload(scenario)

        results = []
        with self._dispatcher(backend, jobs, payload) as dispatch:
            for snr_index, value in enumerate(grid):
                point = SnrPoint.from_db(float(value), scenario.snr_type, scenario.rate)
                started = time.perf_counter()
                trials, errors, ml_lb = self._run_point(
                    dispatch, jobs, snr_index, point.es_over_n0_db, stop, batch_size
                )
                estimate = self._estimate(float(value), point, trials, errors, ml_lb, scenario, wef)
                logger.info(
                    "SNR point finished",
                    extra={
                        "scenario": scenario.name,
                        "snr_db": float(value),
                        "trials": trials,
                        "block_errors": errors,
                        "ml_lb_events": ml_lb,
                        "elapsed_s": round(time.perf_counter() - started, 3),
                    },
                )
                results.append(estimate)
        return results

    def _run_point(self, dispatch, jobs: int, snr_index: int, es_over_n0_db: float,
                   stop: StopRule, batch_size: int) -> Tuple[int, int, int]:
        trials = errors = ml_lb = 0
        next_start = 0
        while True:
            wave = []
            for _ in range(jobs):
                if next_start >= stop.max_trials:
                    break
                count = min(batch_size, stop.max_trials - next_start)
                wave.append((snr_index, es_over_n0_db, next_start, count))
                next_start += count
            if not wave:
                return trials, errors, ml_lb
            for (_, _, _, count), (batch_errors, batch_ml_lb) in zip(wave, dispatch(wave)):
                trials += count
                errors += batch_errors
                ml_lb += batch_ml_lb
                if errors >= stop.min_errors or trials >= stop.max_trials:
                    return trials, errors, ml_lb

    def _dispatcher(self, backend: SimBackend, jobs: int, payload: Dict[str, Any]):
        if backend is SimBackend.CELERY:
            from .background_service import BackgroundService
            return BackgroundService().batch_dispatcher(payload)
        return _LocalDispatcher(payload, jobs)

    def _estimate(self, snr_db: float, point: SnrPoint, trials: int, errors: int, ml_lb: int,
                  scenario: Scenario, wef: Optional[WeightPoly]) -> BlerEstimate:
        low, high = wilson_interval(errors, trials)
        union = simple = None
        if wef is not None and math.isfinite(point.rho):
            n, k = scenario.block_len, scenario.message_len
            union = self.bound_service.union_bound(wef, point)
            simple = self.bound_service.simple_bound(wef, point, n, k)
        return BlerEstimate(
            snr_db=snr_db,
            es_over_n0_db=point.es_over_n0_db,
            trials=trials,
            block_errors=errors,
            ml_lb_events=ml_lb,
            bler=errors / trials if trials else 0.0,
            ml_lb=ml_lb / trials if trials else 0.0,
            ci_low=low,
            ci_high=high,
            union_bound=union,
            simple_bound=simple,
        )


class _LocalDispatcher:
    """In-process execution, or a process pool when jobs > 1"""

    def __init__(self, payload: Dict[str, Any], jobs: int):
        self.payload = payload
        self.jobs = jobs
        self.pool = None

    def __enter__(self):
        if self.jobs > 1:
            self.pool = ProcessPoolExecutor(max_workers=self.jobs)
        return self

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()
        return False

    def __call__(self, wave: List[Tuple[int, float, int, int]]) -> List[Tuple[int, int]]:
        if self.pool is None:
            return [execute_batch(self.payload, *item) for item in wave]
        futures = [self.pool.submit(execute_batch, self.payload, *item) for item in wave]
        return [f.result() for f in futures]
