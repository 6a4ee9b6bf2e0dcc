"""
SC / SCL decoding of (i-)polar codes in the LLR domain, brute-force ML,
concatenated decoding with outer error detection, and BEC genie analysis.

LLRs are log W(y|0)/W(y|1): positive favours bit 0.
"""

import heapq
import logging
from typing import Callable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from ..entities.code import CodeSpec, InterleaverSet
from ..entities.exceptions import ResourceLimitException, ValidationException
from ..entities.outer import ConcatScheme
from ..entities.types import CandidateList
from .outer_code_service import OuterCodeService
from .polar_service import PolarService
from shared.config.settings import settings

logger = logging.getLogger(__name__)


def _min_sum(l1: np.ndarray, l2: np.ndarray) -> np.ndarray:
    return np.sign(l1) * np.sign(l2) * np.minimum(np.abs(l1), np.abs(l2))


def _take(arr: np.ndarray, lineage: np.ndarray) -> np.ndarray:
    """Reorder the path axis (axis 1) of arr by lineage (B, P')"""
    return np.take_along_axis(arr, lineage[:, :, None], axis=1)


def _compose(first: Optional[np.ndarray], second: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if first is None:
        return second
    if second is None:
        return first
    return np.take_along_axis(first, second, axis=1)


class _GraphWalker:
    """Shared encoder-graph bookkeeping for the SC family"""

    def __init__(self, spec: CodeSpec, ils: Optional[InterleaverSet]):
        if ils is not None and ils.m_exp != spec.m_exp:
            raise ValidationException(
                f"interleaver set is sized for M={ils.m_exp}, code has M={spec.m_exp}"
            )
        self.spec = spec
        self.ils = None if ils is None or ils.is_identity else ils
        self.mask = spec.unfrozen_mask
        self.prefix = np.concatenate([[0], np.cumsum(self.mask)])
        self.msg_pos = np.full(spec.block_len, -1, dtype=np.intp)
        self.msg_pos[spec.unfrozen_array] = np.arange(spec.dimension)

    def all_frozen(self, offset: int, n: int) -> bool:
        return self.prefix[offset + n] == self.prefix[offset]

    def perm(self, level: int, offset: int) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """(pi, pi^-1) applied when merging the two halves of this node"""
        if self.ils is None or level < 2:
            return None, None
        key = (level - 1, offset >> level)
        return self.ils.perm_arrays[key], self.ils.inverse_arrays[key]


def _prepare_llr(llr, n: int) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(llr, dtype=float)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != n:
        raise ValidationException(f"LLR vector must have length {n}, got shape {np.shape(llr)}")
    if np.isnan(arr).any():
        raise ValidationException("LLR vector contains NaN")
    sat = settings.llr_saturation
    return np.clip(arr, -sat, sat), single


class _ScDecoder(_GraphWalker):
    """Hard-decision successive cancellation over a batch (B, n)"""

    def run(self, llr: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        self.u = np.zeros((llr.shape[0], self.spec.dimension), dtype=np.uint8)
        x = self._node(llr, self.spec.m_exp, 0)
        return self.u, x

    def _node(self, alpha: np.ndarray, level: int, offset: int) -> np.ndarray:
        n = 1 << level
        if self.all_frozen(offset, n):
            return np.zeros(alpha.shape, dtype=np.uint8)
        if level == 0:
            bit = (alpha[:, 0] < 0).astype(np.uint8)
            self.u[:, self.msg_pos[offset]] = bit
            return bit[:, None]
        half = n >> 1
        l1, l2 = alpha[:, :half], alpha[:, half:]
        perm, inv = self.perm(level, offset)
        f = _min_sum(l1, l2)
        if inv is not None:
            f = f[:, inv]
        a = self._node(f, level - 1, offset)
        a_pi = a[:, perm] if perm is not None else a
        g = l2 + (1.0 - 2.0 * a_pi) * l1
        b = self._node(g, level - 1, offset + half)
        return np.concatenate([a_pi ^ b, b], axis=1)


class _ListDecoder(_GraphWalker):
    """
    SCL over a batch: arrays are (B, P, n) with P <= L paths per input.

    Path metric adds |llr| whenever a decision disagrees with the LLR sign.
    Children return their lineage (B, P') into the parent's paths, or None
    when no path was forked or dropped.
    """

    def __init__(self, spec: CodeSpec, ils: Optional[InterleaverSet], list_size: int):
        super().__init__(spec, ils)
        self.list_size = list_size

    def run(self, llr: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        batch = llr.shape[0]
        self.pm = np.zeros((batch, 1))
        self.u = np.zeros((batch, 1, self.spec.dimension), dtype=np.uint8)
        x, _ = self._node(llr[:, None, :], self.spec.m_exp, 0)
        return self.u, self.pm, x

    def _node(self, alpha: np.ndarray, level: int, offset: int):
        n = 1 << level
        if self.all_frozen(offset, n):
            self.pm = self.pm + np.where(alpha < 0, -alpha, 0.0).sum(axis=2)
            return np.zeros(alpha.shape, dtype=np.uint8), None
        if level == 0:
            return self._leaf(alpha[:, :, 0], offset)
        half = n >> 1
        l1, l2 = alpha[:, :, :half], alpha[:, :, half:]
        perm, inv = self.perm(level, offset)
        f = _min_sum(l1, l2)
        if inv is not None:
            f = f[:, :, inv]
        a, lin_a = self._node(f, level - 1, offset)
        if lin_a is not None:
            l1, l2 = _take(l1, lin_a), _take(l2, lin_a)
        a_pi = a[:, :, perm] if perm is not None else a
        g = l2 + (1.0 - 2.0 * a_pi) * l1
        b, lin_b = self._node(g, level - 1, offset + half)
        if lin_b is not None:
            a_pi = _take(a_pi, lin_b)
        return np.concatenate([a_pi ^ b, b], axis=2), _compose(lin_a, lin_b)

    def _leaf(self, lam: np.ndarray, idx: int):
        batch, paths = lam.shape
        pen0 = np.where(lam < 0, -lam, 0.0)
        pen1 = np.where(lam > 0, lam, 0.0)
        cand = np.stack([self.pm + pen0, self.pm + pen1], axis=2).reshape(batch, 2 * paths)
        keep = min(self.list_size, 2 * paths)
        order = np.argsort(cand, axis=1, kind="stable")[:, :keep]
        parents = order // 2
        bits = (order % 2).astype(np.uint8)
        self.pm = np.take_along_axis(cand, order, axis=1)
        self.u = _take(self.u, parents)
        self.u[:, :, self.msg_pos[idx]] = bits
        return bits[:, :, None], parents


class ConcatDecodeResult(NamedTuple):
    message: np.ndarray          # (P, k_outer) systematic outer messages
    inner_messages: np.ndarray   # (Q, K) selected inner messages
    passed: bool                 # the selection passed the outer detector
    visited: int                 # combinations examined
    codewords: np.ndarray        # (Q, N) inner codewords of the selection


def combination_order(metrics: Sequence[np.ndarray], limit: Optional[int] = None) -> Iterator[Tuple[Tuple[int, ...], float]]:
    """
    Lazily enumerate index tuples over Q sorted metric lists in ascending
    summed metric (best-first frontier; ties by index tuple).
    """
    metrics = [np.asarray(m, dtype=float) for m in metrics]
    if any(len(m) == 0 for m in metrics):
        return
    start = (0,) * len(metrics)
    heap = [(float(sum(m[0] for m in metrics)), start)]
    seen = {start}
    produced = 0
    while heap and (limit is None or produced < limit):
        total, idx = heapq.heappop(heap)
        yield idx, total
        produced += 1
        for b in range(len(idx)):
            if idx[b] + 1 < len(metrics[b]):
                nxt = idx[:b] + (idx[b] + 1,) + idx[b + 1:]
                if nxt not in seen:
                    seen.add(nxt)
                    step = metrics[b][idx[b] + 1] - metrics[b][idx[b]]
                    heapq.heappush(heap, (total + float(step), nxt))


class DecoderService:
    """Decoders for (i-)polar codes and concatenated schemes"""

    def __init__(self, polar_service: Optional[PolarService] = None,
                 outer_code_service: Optional[OuterCodeService] = None):
        self.polar_service = polar_service or PolarService()
        self.outer_code_service = outer_code_service or OuterCodeService(self.polar_service)

    def sc_decode(self, llr, spec: CodeSpec, ils: Optional[InterleaverSet] = None,
                  return_codeword: bool = False):
        """
        Successive cancellation; upper-branch LLRs are routed through the
        inverse stage permutations. Accepts one LLR vector or a batch.
        """
        arr, single = _prepare_llr(llr, spec.block_len)
        msgs, words = _ScDecoder(spec, ils).run(arr)
        if single:
            msgs, words = msgs[0], words[0]
        return (msgs, words) if return_codeword else msgs

    def scl_decode_batch(self, llr, spec: CodeSpec, ils: Optional[InterleaverSet],
                         list_size: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """
        Returns messages (B, P, K), metrics (B, P) and codewords (B, P, N)
        with paths ordered by ascending metric, ties by message.
        """
        if list_size < 1:
            raise ValidationException(f"list_size must be >= 1, got {list_size}")
        arr, _ = _prepare_llr(llr, spec.block_len)
        msgs, pm, words = _ListDecoder(spec, ils, list_size).run(arr)
        paths = pm.shape[1]
        if paths > 1:
            for i in range(pm.shape[0]):
                keys = tuple(msgs[i, :, c] for c in range(spec.dimension - 1, -1, -1)) + (pm[i],)
                order = np.lexsort(keys)
                msgs[i], pm[i], words[i] = msgs[i, order], pm[i, order], words[i, order]
        return msgs, pm, words

    def scl_decode(self, llr, spec: CodeSpec, ils: Optional[InterleaverSet] = None,
                   list_size: int = 8) -> CandidateList:
        arr = np.asarray(llr, dtype=float)
        if arr.ndim != 1:
            raise ValidationException("scl_decode takes one LLR vector; use scl_decode_batch for batches")
        msgs, pm, _ = self.scl_decode_batch(arr, spec, ils, list_size)
        return CandidateList(msgs[0], pm[0], capacity=list_size)

    def correlation(self, codewords: np.ndarray, llr: np.ndarray) -> np.ndarray:
        """sum_i (1 - 2 c_i) llr_i / 2"""
        signs = 1.0 - 2.0 * np.asarray(codewords, dtype=float)
        return signs @ np.asarray(llr, dtype=float) / 2.0

    def ml_decode_bruteforce(self, llr, encoder: Callable[[np.ndarray], np.ndarray], k: int) -> np.ndarray:
        """
        argmax over all 2^k codewords of the LLR correlation; ties go to the
        lexicographically smallest message.
        """
        if k > settings.ml_bruteforce_max_k:
            raise ResourceLimitException(
                f"brute-force ML over 2^{k} messages exceeds the limit k <= {settings.ml_bruteforce_max_k}"
            )
        lam = np.clip(np.asarray(llr, dtype=float), -settings.llr_saturation, settings.llr_saturation)
        best_msg, best_val = None, -np.inf
        total = 1 << k
        shifts = np.arange(k - 1, -1, -1, dtype=np.uint64)
        chunk = 1 << 14
        for start in range(0, total, chunk):
            idx = np.arange(start, min(total, start + chunk), dtype=np.uint64)
            msgs = ((idx[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
            corr = self.correlation(encoder(msgs), lam)
            pos = int(np.argmax(corr))
            if corr[pos] > best_val:
                best_val, best_msg = corr[pos], msgs[pos]
        return best_msg

    def ml_lb_event(self, decoded_codeword, transmitted_codeword, llr) -> bool:
        """True iff the (wrong) decision is more likely than the transmitted word"""
        decoded = np.asarray(decoded_codeword, dtype=np.uint8)
        sent = np.asarray(transmitted_codeword, dtype=np.uint8)
        if np.array_equal(decoded, sent):
            return False
        lam = np.clip(np.asarray(llr, dtype=float), -settings.llr_saturation, settings.llr_saturation)
        return bool(self.correlation(decoded.ravel(), lam.ravel()) > self.correlation(sent.ravel(), lam.ravel()))

    def concat_decode(self, llr_blocks, scheme: ConcatScheme, list_size: int,
                      detector: Optional[Callable[[np.ndarray], bool]] = None) -> ConcatDecodeResult:
        """
        Q independent SCL decodes, then combinations in ascending summed
        metric until one passes the outer detector; otherwise the most
        reliable combination.
        """
        blocks = np.asarray(llr_blocks, dtype=float)
        if blocks.ndim != 2 or blocks.shape[0] != scheme.q or blocks.shape[1] != scheme.inner.block_len:
            raise ValidationException(
                f"expected {scheme.q} LLR blocks of length {scheme.inner.block_len}, got shape {blocks.shape}"
            )
        detector = detector or self.outer_code_service.detector(scheme)
        lists = [
            self.scl_decode_batch(blocks[b], scheme.inner, scheme.inner_interleavers[b], list_size)
            for b in range(scheme.q)
        ]
        metrics = [pm[0] for _, pm, _ in lists]
        chosen, passed, visited = None, False, 0
        for idx, _ in combination_order(metrics, limit=settings.concat_visit_cap):
            visited += 1
            inner = np.stack([lists[b][0][0, i] for b, i in enumerate(idx)])
            if detector(inner):
                chosen, passed = idx, True
                break
        if chosen is None:
            chosen = (0,) * scheme.q
        inner = np.stack([lists[b][0][0, i] for b, i in enumerate(chosen)])
        words = np.stack([lists[b][2][0, i] for b, i in enumerate(chosen)])
        outer_words = self.outer_code_service.deinterleave_outer(inner, scheme)
        return ConcatDecodeResult(
            message=outer_words[:, :scheme.outer_k],
            inner_messages=inner,
            passed=passed,
            visited=visited,
            codewords=words,
        )

    # Binary erasure channel, genie-aided SC

    def bec_genie_erasures(self, erased, ils: InterleaverSet) -> np.ndarray:
        """
        Per-bit erasure flags of genie-aided SC for channel erasure
        patterns erased (N,) or (B, N): a check combination is erased when
        either input is, a variable combination only when both are.
        """
        flags = np.asarray(erased, dtype=bool)
        single = flags.ndim == 1
        if single:
            flags = flags[None, :]
        n = 1 << ils.m_exp
        if flags.shape[1] != n:
            raise ValidationException(f"erasure pattern must have length {n}")
        walker = _GraphWalker(CodeSpec(m_exp=ils.m_exp, unfrozen=tuple(range(n))), ils)
        out = np.zeros_like(flags)

        def node(state: np.ndarray, level: int, offset: int) -> None:
            if level == 0:
                out[:, offset] = state[:, 0]
                return
            half = 1 << (level - 1)
            e1, e2 = state[:, :half], state[:, half:]
            _, inv = walker.perm(level, offset)
            upper = e1 | e2
            if inv is not None:
                upper = upper[:, inv]
            node(upper, level - 1, offset)
            node(e1 & e2, level - 1, offset + half)

        node(flags, ils.m_exp, 0)
        return out[0] if single else out

    def bec_erasure_profile(self, ils: InterleaverSet) -> np.ndarray:
        """
        counts[i, e]: number of channel erasure patterns with e erasures
        under which bit i is erased, over all 2^N patterns.
        """
        n = 1 << ils.m_exp
        if n > 20:
            raise ResourceLimitException(f"exhaustive BEC enumeration over 2^{n} patterns is too large")
        idx = np.arange(1 << n, dtype=np.int64)
        patterns = ((idx[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
        flags = self.bec_genie_erasures(patterns, ils)
        weights = patterns.sum(axis=1)
        counts = np.zeros((n, n + 1), dtype=np.int64)
        for e in range(n + 1):
            counts[:, e] = flags[weights == e].sum(axis=0)
        return counts
