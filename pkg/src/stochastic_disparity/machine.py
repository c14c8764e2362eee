"""Naive Bayesian fusion on stochastic buses.

The machine is an M x N matrix of product modules: row j carries the signal
for value j of the searched variable, column i multiplies in data term i via
an AND gate fed by an independent bit source. The output bus encodes the
posterior up to the product of the per-term bus constants, and saturating
counters turn it into a max-normalized distribution plus the argmax index.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bitstream import DEFAULT_MAX_CYCLES, stream_seed

# Source index namespaces inside one machine's seed space: prior sources use
# (PRIOR_LANE, j), the term source at column i, row j uses (i + 1, j).
PRIOR_LANE = 0


@dataclass(frozen=True)
class FusionSpec:
    """Immutable description of one fusion problem.

    `prior` holds the M prior channel rates (bus constant C_0), `term_table`
    is the N x M matrix of data-term rates p[i, j] = C_i * P(K_i | S = S_j),
    and `bus_constants` collects C_0 .. C_N.
    """

    prior: np.ndarray
    term_table: np.ndarray
    bus_constants: np.ndarray

    def __post_init__(self):
        prior = np.asarray(self.prior, dtype=float)
        table = np.asarray(self.term_table, dtype=float)
        consts = np.asarray(self.bus_constants, dtype=float)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "term_table", table)
        object.__setattr__(self, "bus_constants", consts)
        if prior.ndim != 1 or prior.size == 0:
            raise ValueError("prior must be a non-empty vector")
        if table.ndim != 2 or table.shape[1] != prior.size:
            raise ValueError("term table must be N x M with M matching the prior")
        if consts.shape != (table.shape[0] + 1,):
            raise ValueError("need one bus constant per term plus the prior")
        for name, arr in (("prior", prior), ("term table", table)):
            if np.any(arr < 0) or np.any(arr > 1):
                raise ValueError(f"{name} rates must lie in [0, 1]")
        if np.any(consts <= 0):
            raise ValueError("bus constants must be positive")

    @property
    def cardinality(self) -> int:
        return self.prior.size

    @property
    def n_terms(self) -> int:
        return self.term_table.shape[0]

    def channel_products(self) -> np.ndarray:
        """Analytic output-channel rates: prior times the column products."""
        if self.n_terms == 0:
            return self.prior.copy()
        return self.prior * np.prod(self.term_table, axis=0)

    def output_constant(self) -> float:
        """Bus constant of the output bus: the exact product of C_0 .. C_N."""
        return float(np.prod(self.bus_constants))


@dataclass(frozen=True)
class MachineResult:
    winner: Optional[int]
    counts: np.ndarray
    cycles: int
    readout: np.ndarray
    n_max: int
    timed_out: bool


class Machine:
    """A runnable fusion machine with one independent bit source per module.

    Prior channels at rate exactly 1 are wired as constant-1 lines and consume
    no randomness; every other prior channel and every term module gets its
    own generator stream, so no bitstream is ever reused across AND gates.
    """

    def __init__(self, spec: FusionSpec, seed: int):
        self.spec = spec
        self.seed = seed
        m = spec.cardinality
        self._prior_rngs = [
            None
            if spec.prior[j] == 1.0
            else np.random.default_rng(stream_seed(seed, PRIOR_LANE, j))
            for j in range(m)
        ]
        self._term_rngs = [
            [
                np.random.default_rng(stream_seed(seed, i + 1, j))
                for j in range(m)
            ]
            for i in range(spec.n_terms)
        ]

    @property
    def n_random_sources(self) -> int:
        """Random generators actually instantiated (term modules + non-constant
        prior channels)."""
        n_prior = sum(1 for r in self._prior_rngs if r is not None)
        return self.spec.n_terms * self.spec.cardinality + n_prior

    @property
    def n_term_sources(self) -> int:
        return self.spec.n_terms * self.spec.cardinality

    def emit_output_bits(self, n: int) -> np.ndarray:
        """Emit `n` cycles of the output bus as an (M, n) bit matrix."""
        if n <= 0:
            raise ValueError("cycle count must be positive")
        spec = self.spec
        m = spec.cardinality
        bits = np.ones((m, n), dtype=bool)
        for j, rng in enumerate(self._prior_rngs):
            if rng is not None:
                bits[j] &= rng.random(n) < spec.prior[j]
        for i in range(spec.n_terms):
            row_rates = spec.term_table[i]
            for j in range(m):
                bits[j] &= self._term_rngs[i][j].random(n) < row_rates[j]
        return bits


def build_machine(spec: FusionSpec, seed: int) -> Machine:
    return Machine(spec, seed)


def run_machine(
    machine: Machine,
    n_max: int,
    max_cycles: int = DEFAULT_MAX_CYCLES,
    block: int = 256,
) -> MachineResult:
    """Run the machine until the first output counter saturates.

    Ties on the stop cycle resolve to the lowest index. A run that exhausts
    `max_cycles` is flagged timed out, never silently truncated.
    """
    if n_max <= 0:
        raise ValueError("counter maximum must be positive")
    if max_cycles <= 0:
        raise ValueError("max_cycles must be positive")
    m = machine.spec.cardinality
    counts = np.zeros(m, dtype=np.int64)
    cycles_done = 0
    while cycles_done < max_cycles:
        k = min(block, max_cycles - cycles_done)
        bits = machine.emit_output_bits(k)
        totals = counts[:, None] + np.cumsum(bits, axis=1, dtype=np.int64)
        hit_cycles = (totals >= n_max).any(axis=0)
        if hit_cycles.any():
            stop = int(np.argmax(hit_cycles))
            final = totals[:, stop]
            winner = int(np.argmax(final >= n_max))
            return MachineResult(
                winner=winner,
                counts=final.copy(),
                cycles=cycles_done + stop + 1,
                readout=final / n_max,
                n_max=n_max,
                timed_out=False,
            )
        counts = totals[:, -1]
        cycles_done += k
    return MachineResult(
        winner=None,
        counts=counts.copy(),
        cycles=cycles_done,
        readout=counts / n_max,
        n_max=n_max,
        timed_out=True,
    )


def map_estimate(result: MachineResult) -> int:
    """The argmax of the max-normalized posterior: the first counter to fill."""
    if result.timed_out or result.winner is None:
        raise ValueError("no MAP estimate from a timed-out run")
    return result.winner


def race_product_channels(
    rng: np.random.Generator,
    rates: np.ndarray,
    n_max: int,
    max_cycles: int = DEFAULT_MAX_CYCLES,
) -> MachineResult:
    """Race M channels with known per-cycle rates against saturating counters.

    Statistically equivalent to `run_machine` on a spec whose channel products
    equal `rates` (the AND of independent Bernoulli streams is a Bernoulli
    stream at the product rate), but draws one variate per channel-cycle. Used
    for bulk per-pixel runs where building a full machine per pixel would be
    wasteful. Cycle accounting and tie-breaking are identical.
    """
    rates = np.asarray(rates, dtype=float)
    m = rates.size
    counts = np.zeros(m, dtype=np.int64)
    cycles_done = 0
    top = rates.max()
    # Aim to finish in one or two blocks when the dominant rate is healthy.
    if top > 0:
        block = int(min(max(2.0 * n_max / top, 64), 8192))
    else:
        block = 1024
    while cycles_done < max_cycles:
        k = min(block, max_cycles - cycles_done)
        bits = rng.random((m, k)) < rates[:, None]
        totals = counts[:, None] + np.cumsum(bits, axis=1, dtype=np.int64)
        hit_cycles = (totals >= n_max).any(axis=0)
        if hit_cycles.any():
            stop = int(np.argmax(hit_cycles))
            final = totals[:, stop]
            winner = int(np.argmax(final >= n_max))
            return MachineResult(
                winner=winner,
                counts=final.copy(),
                cycles=cycles_done + stop + 1,
                readout=final / n_max,
                n_max=n_max,
                timed_out=False,
            )
        counts = totals[:, -1]
        cycles_done += k
    return MachineResult(
        winner=None,
        counts=counts.copy(),
        cycles=cycles_done,
        readout=counts / n_max,
        n_max=n_max,
        timed_out=True,
    )
