"""Multi-message broadcast simulation on radius-2 networks.

The source holds k messages and must get all of them to every receiver.
Policies are centralized with full topology knowledge (strong baselines make
the gap to the counting bound meaningful): a deterministic source phase
pushes the k messages to the senders one per round, then senders relay under
round_robin, greedy_schedule, or random_p scheduling. Content is either
routing (packets carry message ids) or coding (packets carry GF(2)
coefficient vectors; a receiver decodes at rank k). Message size equals
packet size, so one reception accounts for exactly one message unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .errors import InputError
from .model import BipartiteRadioNet, Radius2Net, TransmitSet, round_step
from .util import derive_rng
from .verifier import (
    ENUMERATION_BUDGET_BITS,
    max_receptions_exact,
    max_receptions_search,
)

POLICIES = ("round_robin", "greedy_schedule", "random_p")
CONTENT_MODELS = ("routing", "coding")


class GF2Basis:
    """Row basis over the binary field, vectors as bit masks.

    Insertion eliminates against existing pivots, so rank is maintained
    incrementally and never decreases; each insert raises it by at most 1.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self._pivot_rows: dict[int, int] = {}

    def insert(self, vector: int) -> bool:
        """Add a vector; True if it was independent of the basis."""
        v = vector
        while v:
            top = v.bit_length() - 1
            row = self._pivot_rows.get(top)
            if row is None:
                self._pivot_rows[top] = v
                return True
            v ^= row
        return False

    @property
    def rank(self) -> int:
        return len(self._pivot_rows)


@dataclass
class ReceiverState:
    """What one receiver has accumulated: message ids or a coefficient basis."""

    mode: str
    k: int
    ids: set[int] = field(default_factory=set)
    basis: Optional[GF2Basis] = None
    receptions: int = 0

    def __post_init__(self):
        if self.mode not in CONTENT_MODELS:
            raise InputError(f"unknown content model {self.mode!r}")
        if self.mode == "coding" and self.basis is None:
            self.basis = GF2Basis(self.k)

    def receive(self, payload: int) -> None:
        self.receptions += 1
        if self.mode == "routing":
            self.ids.add(payload)
        else:
            self.basis.insert(payload)

    @property
    def rank(self) -> int:
        """Decoded dimension: distinct ids held, or basis rank under coding."""
        if self.mode == "routing":
            return len(self.ids)
        return self.basis.rank

    @property
    def decoded(self) -> bool:
        return self.rank >= self.k


def decode_rank(state: ReceiverState) -> int:
    """Rank of the stored coefficient basis (coding model only)."""
    if state.mode != "coding":
        raise InputError("decode_rank applies to the coding content model")
    return state.basis.rank


@dataclass(frozen=True)
class BroadcastConfig:
    """Run parameters for one broadcast simulation.

    packet_bits defaults to ceil(log2(total_nodes)) at run time, the minimum
    the model allows; message size is pinned to packet size.
    """

    k: int
    content_model: str = "routing"
    policy: str = "round_robin"
    p: Optional[float] = None
    packet_bits: Optional[int] = None
    max_rounds: int = 100_000
    seed: int = 0

    def __post_init__(self):
        if self.k < 0:
            raise InputError("k must be nonnegative")
        if self.content_model not in CONTENT_MODELS:
            raise InputError(f"content_model must be one of {CONTENT_MODELS}")
        if self.policy not in POLICIES:
            raise InputError(f"policy must be one of {POLICIES}")
        if self.policy == "random_p":
            if self.p is None or not 0.0 < self.p <= 1.0:
                raise InputError("random_p requires a transmit probability 0 < p <= 1")
        elif self.p is not None:
            raise InputError(f"policy {self.policy} takes no probability p")
        if self.packet_bits is not None and self.packet_bits < 1:
            raise InputError("packet_bits must be positive")
        if self.max_rounds < 1:
            raise InputError("max_rounds must be positive")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be a 64-bit unsigned integer")

    @property
    def message_bits(self) -> Optional[int]:
        """Messages are exactly one packet long."""
        return self.packet_bits


@dataclass(frozen=True)
class BroadcastReport:
    """Outcome of a broadcast run plus its counting lower bound.

    series rows are (round, receiver receptions that round, minimum decoded
    dimension across receivers after the round).
    """

    rounds_used: int
    incomplete: bool
    per_receiver_receptions: tuple[int, ...]
    per_receiver_decoded: tuple[bool, ...]
    total_receptions: int
    throughput: Optional[float]
    accounting_lower_bound: Union[int, float]
    maxrec: int
    maxrec_method: str
    series: tuple[tuple[int, int, int], ...]


def lower_bound_rounds(k: int, receiver_count: int, maxrec: int) -> Union[int, float]:
    """Counting bound ceil(k * receiver_count / maxrec) on broadcast rounds.

    Every receiver needs at least k receptions and at most maxrec receiver
    receptions happen per round. maxrec == 0 with work to do means no round
    can ever deliver anything: returns math.inf as the unbounded flag.
    """
    if k < 0 or receiver_count < 0:
        raise InputError("k and receiver_count must be nonnegative")
    if maxrec < 0:
        raise InputError("maxrec must be nonnegative")
    demand = k * receiver_count
    if maxrec == 0:
        return 0 if demand == 0 else math.inf
    return -(-demand // maxrec)


def _best_transmit_mask(net: BipartiteRadioNet, active: list[bool]) -> int:
    """Steepest-ascent transmit set maximizing receptions among active receivers.

    Starts from the empty set and repeatedly applies the single-sender flip
    with the largest positive gain (smallest sender index on ties), so the
    result is deterministic.
    """
    sender_adj = net.sender_to_receivers
    n_prime = net.sender_count
    counters = bytearray(net.receiver_count)
    mask = 0
    while True:
        best_gain = 0
        best_flip = -1
        for u in range(n_prime):
            gain = 0
            if (mask >> u) & 1:
                for r in sender_adj[u]:
                    if active[r]:
                        c = counters[r]
                        if c == 1:
                            gain -= 1
                        elif c == 2:
                            gain += 1
            else:
                for r in sender_adj[u]:
                    if active[r]:
                        c = counters[r]
                        if c == 0:
                            gain += 1
                        elif c == 1:
                            gain -= 1
            if gain > best_gain:
                best_gain = gain
                best_flip = u
        if best_flip < 0:
            return mask
        bit = 1 << best_flip
        mask ^= bit
        if mask & bit:
            for r in sender_adj[best_flip]:
                counters[r] += 1
        else:
            for r in sender_adj[best_flip]:
                counters[r] -= 1


def greedy_schedule(
    net: BipartiteRadioNet, horizon: int, needs: Optional[Iterable[int]] = None
) -> list[TransmitSet]:
    """Greedy per-round transmit sets until every needing receiver has heard once.

    Each round's set is chosen by steepest-ascent flips over receptions among
    receivers still waiting; receivers that receive drop out. Stops early
    when all are satisfied or no set can deliver anything (e.g. receivers
    with no neighbors).
    """
    if horizon < 0:
        raise InputError("horizon must be nonnegative")
    if needs is None:
        waiting = set(range(net.receiver_count))
    else:
        waiting = {int(r) for r in needs}
        for r in waiting:
            if not 0 <= r < net.receiver_count:
                raise InputError(f"receiver index {r} out of range")
    schedule: list[TransmitSet] = []
    while waiting and len(schedule) < horizon:
        active = [r in waiting for r in range(net.receiver_count)]
        mask = _best_transmit_mask(net, active)
        if mask == 0:
            break
        transmit = TransmitSet(net.sender_count, mask)
        outcome = round_step(net, transmit)
        served = {r for r in waiting if outcome.received[r]}
        if not served:
            break
        waiting -= served
        schedule.append(transmit)
    return schedule


def _span_sample(vectors: list[int], rng) -> int:
    """Uniform nonzero element of the GF(2) span of `vectors`.

    XOR of a uniform random subset is uniform over the span; zero draws are
    rejected because an all-zero packet carries nothing.
    """
    if not vectors:
        return 0
    for _ in range(128):
        pick = rng.getrandbits(len(vectors))
        combined = 0
        i = 0
        while pick:
            if pick & 1:
                combined ^= vectors[i]
            pick >>= 1
            i += 1
        if combined:
            return combined
    return 0  # span is {0}; nothing useful to send


def run_broadcast(
    net: Radius2Net, cfg: BroadcastConfig, maxrec: Optional[int] = None
) -> BroadcastReport:
    """Simulate k-message broadcast until every receiver decodes, or the cap.

    Rounds are evaluated with the real collision semantics (round_step);
    packets received by senders become their knowledge, and receivers
    accumulate ids or coefficient vectors. Deterministic given (net, cfg).
    Pass a precomputed `maxrec` to skip the per-run maximization.
    """
    if not isinstance(net, Radius2Net):
        raise InputError("run_broadcast needs a radius-2 network")
    core = net.core
    n_nodes = net.total_nodes
    min_bits = max(1, (n_nodes - 1).bit_length())
    packet_bits = cfg.packet_bits if cfg.packet_bits is not None else min_bits
    if packet_bits < min_bits:
        raise InputError(
            f"packet_bits={packet_bits} below ceil(log2({n_nodes})) = {min_bits}"
        )

    maxrec_method = "given"
    if maxrec is None:
        if core.sender_count <= ENUMERATION_BUDGET_BITS:
            best = max_receptions_exact(core)
        else:
            best = max_receptions_search(core, seed=cfg.seed)
        maxrec = best.best_count
        maxrec_method = best.method

    k = cfg.k
    receiver_count = core.receiver_count
    bound = lower_bound_rounds(k, receiver_count, maxrec)
    states = [ReceiverState(cfg.content_model, k) for _ in range(receiver_count)]
    if k == 0:
        return BroadcastReport(
            rounds_used=0,
            incomplete=False,
            per_receiver_receptions=(0,) * receiver_count,
            per_receiver_decoded=(True,) * receiver_count,
            total_receptions=0,
            throughput=None,
            accounting_lower_bound=bound,
            maxrec=maxrec,
            maxrec_method=maxrec_method,
            series=(),
        )

    n_senders = core.sender_count
    coding = cfg.content_model == "coding"
    receiver_base = net.receiver_node(0)
    sender_known: list[set[int]] = [set() for _ in range(n_senders)]
    sender_vectors: list[list[int]] = [[] for _ in range(n_senders)]
    message_cursor = [0] * n_senders  # per-sender cycle position (routing)
    waiting = {r for r in range(receiver_count) if not states[r].decoded}
    series: list[tuple[int, int, int]] = []
    rounds = 0

    def play_round(node_mask: int, payloads: dict[int, int]) -> None:
        nonlocal rounds
        rounds += 1
        outcome = round_step(net, TransmitSet(n_nodes, node_mask))
        hits = 0
        for node, got in enumerate(outcome.received):
            if not got:
                continue
            payload = payloads[outcome.source_of[node]]
            if 1 <= node <= n_senders:
                j = node - 1
                sender_known[j].add(payload)
                sender_vectors[j].append(payload)
            elif receiver_base <= node < receiver_base + receiver_count:
                r = node - receiver_base
                states[r].receive(payload)
                hits += 1
                if r in waiting and states[r].decoded:
                    waiting.discard(r)
        min_rank = min((s.rank for s in states), default=0)
        series.append((rounds, hits, min_rank))

    # Source phase: one message (or unit coefficient vector) per round. Only
    # the source transmits, so every sender hears exactly one neighbor.
    for m in range(k):
        if not waiting or rounds >= cfg.max_rounds:
            break
        payload = (1 << m) if coding else m
        play_round(1 << net.SOURCE, {net.SOURCE: payload})

    policy_round = 0
    while waiting and rounds < cfg.max_rounds:
        policy_round += 1
        if cfg.policy == "round_robin":
            j = (policy_round - 1) % n_senders
            senders = [j]
        elif cfg.policy == "greedy_schedule":
            active = [r in waiting for r in range(receiver_count)]
            mask = _best_transmit_mask(core, active)
            if mask == 0:
                break  # nobody reachable can still be helped
            senders = [u for u in range(n_senders) if (mask >> u) & 1]
        else:  # random_p
            rng = derive_rng(cfg.seed, rounds + 1)
            senders = [u for u in range(n_senders) if rng.random() < cfg.p]

        payloads: dict[int, int] = {}
        if coding:
            rng = derive_rng(cfg.seed, rounds + 1, 1)
            for u in senders:
                payloads[net.sender_node(u)] = _span_sample(sender_vectors[u], rng)
        elif cfg.policy == "greedy_schedule":
            payloads = _greedy_message_choice(core, states, waiting, senders, k)
            payloads = {net.sender_node(u): msg for u, msg in payloads.items()}
        else:
            for u in senders:
                msg = message_cursor[u] % k
                message_cursor[u] += 1
                assert msg in sender_known[u]
                payloads[net.sender_node(u)] = msg

        node_mask = 0
        for u in senders:
            node_mask |= 1 << net.sender_node(u)
        if node_mask == 0:
            rounds += 1  # an empty random_p round still costs time
            min_rank = min((s.rank for s in states), default=0)
            series.append((rounds, 0, min_rank))
            continue
        play_round(node_mask, payloads)

    receptions = tuple(s.receptions for s in states)
    decoded = tuple(s.decoded for s in states)
    return BroadcastReport(
        rounds_used=rounds,
        incomplete=bool(waiting),
        per_receiver_receptions=receptions,
        per_receiver_decoded=decoded,
        total_receptions=sum(receptions),
        throughput=(k / rounds) if rounds else None,
        accounting_lower_bound=bound,
        maxrec=maxrec,
        maxrec_method=maxrec_method,
        series=tuple(series),
    )


def _greedy_message_choice(
    core: BipartiteRadioNet,
    states: list[ReceiverState],
    waiting: set[int],
    senders: list[int],
    k: int,
) -> dict[int, int]:
    """Pick each transmitter's message id: the one missing from most of the
    receivers that will hear exactly that transmitter this round."""
    sender_set = set(senders)
    exclusive: dict[int, list[int]] = {u: [] for u in senders}
    for r in waiting:
        hit = -1
        hits = 0
        for u in core.receivers[r].neighbors:
            if u in sender_set:
                hits += 1
                if hits > 1:
                    break
                hit = u
        if hits == 1:
            exclusive[hit].append(r)
    choice: dict[int, int] = {}
    for u in senders:
        tally = [0] * k
        for r in exclusive[u]:
            held = states[r].ids
            for msg in range(k):
                if msg not in held:
                    tally[msg] += 1
        best_msg = 0
        best_need = -1
        for msg in range(k):
            if tally[msg] > best_need:
                best_need = tally[msg]
                best_msg = msg
        choice[u] = best_msg
    return choice
