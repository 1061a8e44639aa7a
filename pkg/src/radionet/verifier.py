"""Maximization of single-round receptions over transmit sets.

Exhaustive enumeration walks all 2**n' sender subsets in Gray-code order so
each step flips one sender and touches only that sender's adjacent
receivers. Beyond the enumeration budget a steepest-ascent hill climb with
restarts gives a reproducible lower bound on the true maximum. Both report
a witness transmit set, tie-broken to the smallest bit mask so results are
identical across enumeration order and worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from multiprocessing import get_context
from typing import Optional, Union

from .errors import BudgetError, InputError
from .instance import InstanceParams, sample_instance
from .model import BipartiteRadioNet, TransmitSet, round_step
from .util import derive_rng

#: Exhaustive enumeration is capped at 2**26 subsets.
ENUMERATION_BUDGET_BITS = 26


@dataclass(frozen=True)
class MaxReceptionResult:
    """Best single-round reception count found, with its witness transmit set."""

    best_count: int
    witness: TransmitSet
    method: str  # "exact" | "search"
    subsets_examined: int
    exact_flag: bool


def _enumerate_block(
    sender_adj: tuple[tuple[int, ...], ...],
    receiver_count: int,
    low_bits: int,
    high_mask: int,
) -> tuple[int, int]:
    """Best (count, mask) over all subsets with fixed high bits `high_mask`.

    Walks the 2**low_bits low-bit subsets in Gray-code order, maintaining
    per-receiver transmitting-neighbor counters and the number of receivers
    currently at exactly one. Top-level function so worker processes can
    pickle it.
    """
    counters = bytearray(receiver_count)
    total = 0
    mask = high_mask
    bit = high_mask
    while bit:
        u = (bit & -bit).bit_length() - 1
        bit &= bit - 1
        for r in sender_adj[u]:
            c = counters[r]
            counters[r] = c + 1
            if c == 0:
                total += 1
            elif c == 1:
                total -= 1
    best = total
    best_mask = mask
    for step in range(1, 1 << low_bits):
        u = (step & -step).bit_length() - 1
        flip = 1 << u
        mask ^= flip
        adj_u = sender_adj[u]
        if mask & flip:
            for r in adj_u:
                c = counters[r]
                counters[r] = c + 1
                if c == 0:
                    total += 1
                elif c == 1:
                    total -= 1
        else:
            for r in adj_u:
                c = counters[r]
                counters[r] = c - 1
                if c == 1:
                    total -= 1
                elif c == 2:
                    total += 1
        if total > best:
            best = total
            best_mask = mask
        elif total == best and mask < best_mask:
            best_mask = mask
    return best, best_mask


def max_receptions_exact(net: BipartiteRadioNet, workers: int = 1) -> MaxReceptionResult:
    """Exact maximum receptions over all transmit sets, by full enumeration.

    The witness is the smallest bit mask achieving the maximum, so the
    result is identical for any worker count or block partitioning.
    Raises BudgetError above 2**26 subsets; use max_receptions_search there.
    """
    n_prime = net.sender_count
    if n_prime > ENUMERATION_BUDGET_BITS:
        raise BudgetError(
            f"{n_prime} senders means 2^{n_prime} subsets, past the 2^"
            f"{ENUMERATION_BUDGET_BITS} enumeration budget; use max_receptions_search"
        )
    sender_adj = net.sender_to_receivers
    receiver_count = net.receiver_count
    if workers < 1:
        raise InputError("workers must be at least 1")

    if workers == 1 or n_prime < 8:
        best, best_mask = _enumerate_block(sender_adj, receiver_count, n_prime, 0)
    else:
        # Partition on the 4 high-order bits; each block Gray-walks the rest.
        split = min(4, n_prime)
        low = n_prime - split
        blocks = [
            (sender_adj, receiver_count, low, high << low) for high in range(1 << split)
        ]
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("spawn")
        ) as pool:
            results = list(pool.map(_enumerate_block_star, blocks, chunksize=1))
        best = max(count for count, _ in results)
        best_mask = min(mask for count, mask in results if count == best)

    return MaxReceptionResult(
        best_count=best,
        witness=TransmitSet(n_prime, best_mask),
        method="exact",
        subsets_examined=1 << n_prime,
        exact_flag=True,
    )


def _enumerate_block_star(args) -> tuple[int, int]:
    return _enumerate_block(*args)


def _count_receptions(sender_adj, receiver_count: int, mask: int) -> tuple[bytearray, int]:
    """Per-receiver transmitting-neighbor counters and exactly-one total for `mask`."""
    counters = bytearray(receiver_count)
    total = 0
    bit = mask
    while bit:
        u = (bit & -bit).bit_length() - 1
        bit &= bit - 1
        for r in sender_adj[u]:
            c = counters[r]
            counters[r] = c + 1
            if c == 0:
                total += 1
            elif c == 1:
                total -= 1
    return counters, total


def max_receptions_search(
    net: BipartiteRadioNet,
    restarts: int = 32,
    seed: int = 0,
    max_flips: Optional[int] = None,
) -> MaxReceptionResult:
    """Steepest-ascent single-flip hill climb; a lower bound on the true maximum.

    Starts from every singleton set plus `restarts` random sets of size
    n'/2, n'/4, ... cycling; each climb repeatedly applies the best
    improving flip (smallest sender index on ties) until none improves or
    the flip budget runs out. Deterministic given the seed.
    """
    if restarts < 1:
        raise InputError("restarts must be positive")
    n_prime = net.sender_count
    sender_adj = net.sender_to_receivers
    receiver_count = net.receiver_count
    if max_flips is None:
        max_flips = 64 * max(n_prime, 1)
    rng = derive_rng(seed)

    starts = [1 << u for u in range(n_prime)]
    size_levels = max(1, n_prime.bit_length() - 1)
    for t in range(restarts):
        size = max(1, n_prime >> (1 + (t % size_levels)))
        members = rng.sample(range(n_prime), size)
        mask = 0
        for u in members:
            mask |= 1 << u
        starts.append(mask)

    best = -1
    best_mask = 0
    examined = 0
    flips_left = max_flips
    for start in starts:
        counters, total = _count_receptions(sender_adj, receiver_count, start)
        examined += 1
        mask = start
        while flips_left > 0:
            best_gain = 0
            best_flip = -1
            for u in range(n_prime):
                gain = 0
                if (mask >> u) & 1:
                    for r in sender_adj[u]:
                        c = counters[r]
                        if c == 1:
                            gain -= 1
                        elif c == 2:
                            gain += 1
                else:
                    for r in sender_adj[u]:
                        c = counters[r]
                        if c == 0:
                            gain += 1
                        elif c == 1:
                            gain -= 1
                if gain > best_gain:
                    best_gain = gain
                    best_flip = u
            examined += n_prime
            if best_flip < 0:
                break
            flips_left -= 1
            flip_bit = 1 << best_flip
            mask ^= flip_bit
            adj_u = sender_adj[best_flip]
            if mask & flip_bit:
                for r in adj_u:
                    counters[r] += 1
            else:
                for r in adj_u:
                    counters[r] -= 1
            total += best_gain
        if total > best or (total == best and mask < best_mask):
            best = total
            best_mask = mask
    return MaxReceptionResult(
        best_count=best,
        witness=TransmitSet(n_prime, best_mask),
        method="search",
        subsets_examined=examined,
        exact_flag=False,
    )


@dataclass(frozen=True)
class ThresholdReport:
    """Comparison of the achieved per-round maximum against a c*n' threshold."""

    best_count: int
    method: str
    witness: TransmitSet
    threshold: Fraction
    receiver_count: int
    fraction: Optional[float]  # best_count / receiver_count
    fraction_bound: Optional[Fraction]  # threshold / receiver_count = c / class_count
    passed: bool
    vacuous: bool  # threshold >= receiver_count: nothing to certify at this scale


def check_lemma_threshold(
    net: BipartiteRadioNet,
    c: Union[int, str, Fraction],
    result: Optional[MaxReceptionResult] = None,
    restarts: int = 32,
    seed: int = 0,
) -> ThresholdReport:
    """Check whether any transmit set reaches more than c*n' receivers.

    Passes when best_count <= c * sender_count (equality passes). When the
    threshold is at or above the receiver count the check is flagged
    vacuous: every net satisfies it trivially at that scale. The fraction
    bound restates the threshold per receiver, threshold / receiver_count.
    """
    c = Fraction(c)
    if c <= 0:
        raise InputError("threshold factor c must be positive")
    if result is None:
        if net.sender_count <= ENUMERATION_BUDGET_BITS:
            result = max_receptions_exact(net)
        else:
            result = max_receptions_search(net, restarts=restarts, seed=seed)
    threshold = c * net.sender_count
    receiver_count = net.receiver_count
    fraction = result.best_count / receiver_count if receiver_count else None
    fraction_bound = threshold / receiver_count if receiver_count else None
    return ThresholdReport(
        best_count=result.best_count,
        method=result.method,
        witness=result.witness,
        threshold=threshold,
        receiver_count=receiver_count,
        fraction=fraction,
        fraction_bound=fraction_bound,
        passed=result.best_count <= threshold,
        vacuous=threshold >= receiver_count,
    )


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample mean with its standard error."""

    mean: float
    std_error: float
    trials: int


def monte_carlo_expectation(
    params: InstanceParams, s: int, trials: int, seed: int = 0
) -> MonteCarloEstimate:
    """Average receptions over fresh random instances for a fixed transmit set.

    Each trial draws a new instance and transmits from the first `s`
    senders (any fixed s-set gives the same distribution, since neighbor
    sets are exchangeable over senders). Returns the sample mean and its
    standard error.
    """
    if not 0 <= s <= params.n_prime:
        raise InputError(f"s={s} outside [0, {params.n_prime}]")
    if trials < 1:
        raise InputError("trials must be positive")
    transmitters = TransmitSet(params.n_prime, (1 << s) - 1)
    rng = derive_rng(seed)
    total = 0.0
    total_sq = 0.0
    for _ in range(trials):
        trial_seed = rng.getrandbits(64)
        net = sample_instance(InstanceParams(params.n, trial_seed))
        count = round_step(net, transmitters).reception_count
        total += count
        total_sq += count * count
    mean = total / trials
    if trials > 1:
        variance = max(0.0, (total_sq - trials * mean * mean) / (trials - 1))
        std_error = math.sqrt(variance / trials)
    else:
        std_error = 0.0
    return MonteCarloEstimate(mean=mean, std_error=std_error, trials=trials)
