"""Monte Carlo BER/FER measurement with per-trial streams and resumable CSV.

Every trial draws its source bits and noise from a stream derived from
(master_seed, trial_index), and the stop rule is evaluated by scanning
results in trial order, so a curve point is a pure function of its
configuration no matter how many workers ran it or how they were scheduled.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import spa
from .channel import RngStream, awgn, channel_llr, ebno_sigma, gaussian_q, modulate
from .concat import ConcatCode, Schedule, concat_decode, concat_encode
from .interleave import BlockPermutation, load_permutation, random_permutation
from .ira import IraCode, encode, load_code

__all__ = [
    "ConfigError",
    "StopRule",
    "CurvePoint",
    "SimConfig",
    "CSV_HEADER",
    "load_system",
    "run_ber_point",
    "run_curve",
    "pilot_select",
    "two_proportion_z",
]

CSV_HEADER = (
    "ebno_db,blocks,bit_errors,block_errors,ber,fer,"
    "mean_outer_iters,mean_component_iters,seed"
)
NOISELESS_LLR = 20.0


class ConfigError(ValueError):
    """A simulation configuration that cannot be run as given."""


@dataclass(frozen=True)
class StopRule:
    min_block_errors: int = 100
    max_blocks: int = 1_000_000

    def __post_init__(self):
        if self.min_block_errors < 1 or self.max_blocks < 1:
            raise ConfigError("stop rule bounds must be >= 1")


@dataclass(frozen=True)
class CurvePoint:
    ebno_db: float
    blocks_run: int
    bit_errors: int
    block_errors: int
    ber: float
    fer: float
    mean_outer_iters: float
    mean_component_iters: float
    wall_seconds: float


@dataclass(frozen=True)
class SimConfig:
    """Everything a simulate run needs; file paths are code/permutation
    prefixes as written by the construct and design-interleaver commands."""

    system: str  # "concat" | "single"
    ebno_db: tuple[float, ...]
    output: str
    master_seed: int = 0
    workers: int = 1
    stop: StopRule = field(default_factory=StopRule)
    noiseless: bool = False
    outer_code: str | None = None
    inner_code: str | None = None
    interleaver: str | None = None
    schedule: Schedule = field(default_factory=Schedule)
    code: str | None = None
    max_iter: int = 100

    def __post_init__(self):
        if self.system not in ("concat", "single"):
            raise ConfigError(f"unknown system {self.system!r}")
        if not self.ebno_db:
            raise ConfigError("ebno_db list must be nonempty")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        object.__setattr__(self, "ebno_db", tuple(float(e) for e in self.ebno_db))

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = {
            "system", "ebno_db", "output", "master_seed", "workers",
            "min_block_errors", "max_blocks", "noiseless", "outer_code",
            "inner_code", "interleaver", "schedule", "code", "max_iter",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        sched = raw.get("schedule", {})
        if not isinstance(sched, dict):
            raise ConfigError("schedule must be an object")
        try:
            return cls(
                system=raw.get("system", "concat"),
                ebno_db=tuple(raw.get("ebno_db", ())),
                output=raw.get("output", "curve.csv"),
                master_seed=int(raw.get("master_seed", 0)),
                workers=int(raw.get("workers", 1)),
                stop=StopRule(
                    min_block_errors=int(raw.get("min_block_errors", 100)),
                    max_blocks=int(raw.get("max_blocks", 1_000_000)),
                ),
                noiseless=bool(raw.get("noiseless", False)),
                outer_code=raw.get("outer_code"),
                inner_code=raw.get("inner_code"),
                interleaver=raw.get("interleaver"),
                schedule=Schedule(
                    outer_iters=int(sched.get("outer_iters", 10)),
                    inner_iters=int(sched.get("inner_iters", 10)),
                    freeze_converged=bool(sched.get("freeze_converged", True)),
                ),
                code=raw.get("code"),
                max_iter=int(raw.get("max_iter", 100)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc


# --- runnable systems ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class _System:
    kind: str  # "concat" | "single"
    concat: ConcatCode | None
    schedule: Schedule
    single: IraCode | None
    max_iter: int

    @property
    def rate(self) -> float:
        if self.kind == "concat":
            return self.concat.rate
        return self.single.rate

    @property
    def source_bits_per_block(self) -> int:
        if self.kind == "concat":
            return self.concat.K * self.concat.K
        return self.single.K


def load_system(config: SimConfig) -> _System:
    """Resolve and validate the files a config references."""
    if config.system == "concat":
        if not (config.outer_code and config.inner_code and config.interleaver):
            raise ConfigError("concat system needs outer_code, inner_code, interleaver")
        outer = load_code(config.outer_code)
        inner = load_code(config.inner_code)
        pi = load_permutation(config.interleaver)
        return _System("concat", ConcatCode(outer, inner, pi), config.schedule, None, 0)
    if not config.code:
        raise ConfigError("single system needs a code path")
    return _System("single", None, config.schedule, load_code(config.code), config.max_iter)


# --- trials ---------------------------------------------------------------------

_CTX: dict = {}


def _init_worker(system: _System, master_seed: int, noiseless: bool) -> None:
    _CTX["system"] = system
    _CTX["master_seed"] = master_seed
    _CTX["noiseless"] = noiseless


def _run_trial(args: tuple[int, float]) -> tuple[int, int, int, int, int]:
    index, sigma = args
    system: _System = _CTX["system"]
    gen = RngStream(_CTX["master_seed"], index).generator()
    noiseless = _CTX["noiseless"]

    if system.kind == "concat":
        cc = system.concat
        source = gen.integers(0, 2, size=(cc.K, cc.K), dtype=np.uint8)
        tx = concat_encode(cc, source)
        symbols = modulate(tx)
        if noiseless:
            llrs = NOISELESS_LLR * symbols
        else:
            llrs = channel_llr(awgn(symbols, sigma, gen), sigma)
        res = concat_decode(cc, llrs, system.schedule)
        bit_errors = int((res.source_bits != source).sum())
        return (
            bit_errors,
            1 if bit_errors else 0,
            res.outer_iters_used,
            res.component_decode_calls,
            res.component_iterations,
        )

    code = system.single
    source = gen.integers(0, 2, size=code.K, dtype=np.uint8)
    tx = encode(code, source)
    symbols = modulate(tx)
    if noiseless:
        llrs = NOISELESS_LLR * symbols
    else:
        llrs = channel_llr(awgn(symbols, sigma, gen), sigma)
    res = spa.decode(code, llrs, None, system.max_iter)
    bit_errors = int((res.hard_bits[: code.K] != source).sum())
    return (bit_errors, 1 if bit_errors else 0, 0, 1, res.iterations_used)


def _measure_point(
    system: _System,
    ebno_db: float,
    stop: StopRule,
    master_seed: int,
    noiseless: bool,
    pool: ProcessPoolExecutor | None,
    chunk: int,
) -> CurvePoint:
    sigma = 1.0 if noiseless else ebno_sigma(ebno_db, system.rate)
    _init_worker(system, master_seed, noiseless)  # also serve in-process calls

    t0 = time.perf_counter()
    bit_errors = block_errors = blocks = 0
    outer_total = comp_calls = comp_iters = 0
    base = 0
    while base < stop.max_blocks and block_errors < stop.min_block_errors:
        hi = min(base + chunk, stop.max_blocks)
        args = [(i, sigma) for i in range(base, hi)]
        if pool is None:
            results = [_run_trial(a) for a in args]
        else:
            results = list(pool.map(_run_trial, args))
        for be, blk, outer_used, calls, iters in results:
            blocks += 1
            bit_errors += be
            block_errors += blk
            outer_total += outer_used
            comp_calls += calls
            comp_iters += iters
            if block_errors >= stop.min_block_errors:
                break
        base = hi

    return CurvePoint(
        ebno_db=ebno_db,
        blocks_run=blocks,
        bit_errors=bit_errors,
        block_errors=block_errors,
        ber=bit_errors / (blocks * system.source_bits_per_block),
        fer=block_errors / blocks,
        mean_outer_iters=outer_total / blocks,
        mean_component_iters=comp_iters / comp_calls if comp_calls else 0.0,
        wall_seconds=time.perf_counter() - t0,
    )


def run_ber_point(config: SimConfig, ebno_db: float) -> CurvePoint:
    """Measure one Eb/N0 point under the config's stop rule."""
    system = load_system(config)
    with _maybe_pool(config, system) as pool:
        return _measure_point(
            system, ebno_db, config.stop, config.master_seed,
            config.noiseless, pool, _chunk_size(config.workers),
        )


class _maybe_pool:
    """Context manager yielding a ProcessPoolExecutor or None for workers=1."""

    def __init__(self, config: SimConfig, system: _System):
        self.config = config
        self.system = system
        self.pool = None

    def __enter__(self):
        if self.config.workers > 1:
            self.pool = ProcessPoolExecutor(
                max_workers=self.config.workers,
                initializer=_init_worker,
                initargs=(self.system, self.config.master_seed, self.config.noiseless),
            )
        return self.pool

    def __exit__(self, *exc):
        if self.pool is not None:
            self.pool.shutdown()
        return False


def _chunk_size(workers: int) -> int:
    return 64 if workers == 1 else max(16, 4 * workers)


def _format_row(point: CurvePoint, seed: int) -> str:
    return (
        f"{point.ebno_db:g},{point.blocks_run},{point.bit_errors},"
        f"{point.block_errors},{point.ber!r},{point.fer!r},"
        f"{point.mean_outer_iters!r},{point.mean_component_iters!r},{seed}"
    )


def _existing_rows(path: Path) -> dict[str, str]:
    """Map ebno key -> full row for an existing curve file, if compatible."""
    if not path.exists():
        return {}
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"{path}: existing output has a different header")
    rows = {}
    for raw in lines[1:]:
        if raw.strip():
            rows[raw.split(",", 1)[0]] = raw
    return rows


def run_curve(config: SimConfig) -> list[CurvePoint]:
    """Measure every configured point, appending to the output CSV as each
    completes.  Points already present in a compatible output file are kept
    as they are, so interrupted runs resume and finished runs are no-ops."""
    system = load_system(config)
    path = Path(config.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    existing = _existing_rows(path)
    if not path.exists():
        path.write_text(CSV_HEADER + "\n", encoding="utf-8")

    points: list[CurvePoint] = []
    seen: set[str] = set()
    with _maybe_pool(config, system) as pool:
        for ebno in config.ebno_db:
            key = f"{ebno:g}"
            if key in seen:
                continue
            seen.add(key)
            if key in existing:
                points.append(_parse_row(existing[key]))
                continue
            point = _measure_point(
                system, ebno, config.stop, config.master_seed,
                config.noiseless, pool, _chunk_size(config.workers),
            )
            points.append(point)
            with open(path, "a", encoding="utf-8") as f:
                f.write(_format_row(point, config.master_seed) + "\n")
                f.flush()
                os.fsync(f.fileno())
    return points


def _parse_row(row: str) -> CurvePoint:
    parts = row.split(",")
    return CurvePoint(
        ebno_db=float(parts[0]),
        blocks_run=int(parts[1]),
        bit_errors=int(parts[2]),
        block_errors=int(parts[3]),
        ber=float(parts[4]),
        fer=float(parts[5]),
        mean_outer_iters=float(parts[6]),
        mean_component_iters=float(parts[7]),
        wall_seconds=0.0,
    )


# --- interleaver pilot selection -------------------------------------------------


def pilot_select(
    outer: IraCode,
    inner: IraCode,
    schedule: Schedule,
    n_candidates: int,
    pilot_ebno: float,
    pilot_blocks: int,
    master_seed: int,
) -> tuple[BlockPermutation, list[tuple[int, int, int]]]:
    """Score candidate random permutations by a short shared-noise pilot run
    and keep the best (fewest block errors, then bit errors, then index).

    Candidate i uses seed master_seed + i; pilots share trial streams so the
    comparison uses common random numbers.  Returns the winner and the per
    candidate (block_errors, bit_errors, seed) scores.
    """
    if n_candidates < 1 or pilot_blocks < 1:
        raise ValueError("need at least one candidate and one pilot block")
    scores = []
    best = None
    best_key = None
    for i in range(n_candidates):
        perm = random_permutation(outer.K, outer.N, master_seed + i)
        system = _System("concat", ConcatCode(outer, inner, perm), schedule, None, 0)
        point = _measure_point(
            system, pilot_ebno, StopRule(min_block_errors=pilot_blocks + 1, max_blocks=pilot_blocks),
            master_seed, False, None, _chunk_size(1),
        )
        scores.append((point.block_errors, point.bit_errors, perm.seed))
        key = (point.block_errors, point.bit_errors, i)
        if best_key is None or key < best_key:
            best, best_key = perm, key
    return best, scores


def two_proportion_z(errors_a: int, n_a: int, errors_b: int, n_b: int) -> tuple[float, float]:
    """One-sided z statistic and p-value for H1: rate_a < rate_b (pooled)."""
    p_a, p_b = errors_a / n_a, errors_b / n_b
    pooled = (errors_a + errors_b) / (n_a + n_b)
    denom = math.sqrt(pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b))
    if denom == 0.0:
        return 0.0, 0.5
    z = (p_b - p_a) / denom
    return z, gaussian_q(z)
