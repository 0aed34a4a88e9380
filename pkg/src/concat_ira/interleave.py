"""K x N block permutations and sensitivity-aware constraint repair.

The permutation is oriented in the encoder direction: position (r, c) of the
row-coded block maps to position (r', c') of the block entering the column
encoder.  A "bad mapping" is a source position sitting in a sensitive column
of its row codeword that lands in a sensitive systematic row of its column
codeword; repair swaps images until no bad mapping remains, never touching a
swap partner that could itself become one.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .stopping import SensitivityHistogram, select_sensitive

__all__ = [
    "InterleaverInfeasible",
    "PermutationFileError",
    "SensitiveSets",
    "BlockPermutation",
    "BadMappings",
    "random_permutation",
    "count_bad_mappings",
    "design",
    "escalate_design",
    "save_permutation",
    "load_permutation",
]


class InterleaverInfeasible(RuntimeError):
    """No constraint-satisfying permutation is reachable; reason says why."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason  # "counting_bound" | "no_legal_partner" | "attempts_exhausted"


class PermutationFileError(ValueError):
    """Permutation file text that fails to parse or encode a bijection."""


@dataclass(frozen=True)
class SensitiveSets:
    """Sensitive positions of the two component codes.

    row_code_nodes are column indices in 0..N-1 (positions within a row
    codeword); col_code_nodes are row indices in 0..K-1 (systematic positions
    of a column codeword - parity positions never pass through the block).
    """

    row_code_nodes: frozenset[int]
    col_code_nodes: frozenset[int]

    def __post_init__(self):
        object.__setattr__(self, "row_code_nodes", frozenset(int(i) for i in self.row_code_nodes))
        object.__setattr__(self, "col_code_nodes", frozenset(int(j) for j in self.col_code_nodes))

    def validate_for(self, k: int, n: int) -> None:
        if any(not 0 <= c < n for c in self.row_code_nodes):
            raise ValueError("row-code sensitive column index out of range")
        if any(not 0 <= r < k for r in self.col_code_nodes):
            raise ValueError("column-code sensitive row index not in systematic range")


@dataclass(frozen=True, eq=False)
class BlockPermutation:
    """Bijection on the K*N flat positions (flat index = r*N + c)."""

    K: int
    N: int
    forward: np.ndarray
    seed: int
    design_t: int = 0
    repairs: int = 0
    sets: SensitiveSets | None = None

    def __post_init__(self):
        fwd = np.asarray(self.forward, dtype=np.int64)
        size = self.K * self.N
        if fwd.shape != (size,) or not np.array_equal(np.sort(fwd), np.arange(size)):
            raise ValueError("forward map is not a bijection on 0..K*N-1")
        fwd = fwd.copy()
        fwd.setflags(write=False)
        object.__setattr__(self, "forward", fwd)

    def apply(self, block: np.ndarray) -> np.ndarray:
        """Move element (r, c) to its image position; shape is preserved."""
        block = np.asarray(block)
        if block.shape != (self.K, self.N):
            raise ValueError(f"expected block of shape ({self.K}, {self.N})")
        # out must be C-contiguous so the flat scatter below is a view of it
        out = np.empty((self.K, self.N), dtype=block.dtype)
        out.reshape(-1)[self.forward] = block.ravel(order="C")
        return out

    def invert(self) -> "BlockPermutation":
        inv = np.empty_like(self.forward)
        inv[self.forward] = np.arange(self.K * self.N)
        return BlockPermutation(
            K=self.K, N=self.N, forward=inv, seed=self.seed,
            design_t=self.design_t, repairs=self.repairs, sets=self.sets,
        )


def random_permutation(k: int, n: int, seed: int) -> BlockPermutation:
    """Uniform random bijection from an unbiased shuffle, deterministic in seed."""
    if k < 1 or n < 1:
        raise ValueError("block shape must be positive")
    forward = np.random.default_rng(seed).permutation(k * n)
    return BlockPermutation(K=k, N=n, forward=forward, seed=seed)


class BadMappings(NamedTuple):
    count: int
    positions: list[tuple[int, int]]  # offending source positions (r, c)


def count_bad_mappings(perm: BlockPermutation, sets: SensitiveSets) -> BadMappings:
    """Source positions in a sensitive row-code column whose image lands in a
    sensitive column-code row."""
    sets.validate_for(perm.K, perm.N)
    src = np.arange(perm.K * perm.N)
    col_sensitive = np.isin(src % perm.N, list(sets.row_code_nodes), assume_unique=False)
    image_rows = perm.forward // perm.N
    lands_sensitive = np.isin(image_rows, list(sets.col_code_nodes))
    bad = np.flatnonzero(col_sensitive & lands_sensitive)
    return BadMappings(len(bad), [(int(p) // perm.N, int(p) % perm.N) for p in bad])


def design(
    perm0: BlockPermutation,
    sets: SensitiveSets,
    rng: np.random.Generator,
    max_attempts: int | None = None,
    validate_each_swap: bool = False,
) -> BlockPermutation:
    """Repair a permutation until it has zero bad mappings.

    Offenders are fixed in ascending flat order.  Each swap partner is drawn
    uniformly among positions whose own source column is not row-code
    sensitive and whose current image row is not column-code sensitive, so a
    swap removes exactly one offender and can never mint a new one; the
    repair count is therefore monotone.  Raises InterleaverInfeasible when
    the counting bound fails up front, when no legal partner remains, or
    when the attempt budget runs out.
    """
    k, n = perm0.K, perm0.N
    sets.validate_for(k, n)
    if max_attempts is None:
        max_attempts = 50 * k * n

    demand = k * len(sets.row_code_nodes)
    supply = (k - len(sets.col_code_nodes)) * n
    if demand > supply:
        raise InterleaverInfeasible(
            "counting_bound",
            f"{demand} sensitive-column positions cannot all avoid "
            f"{len(sets.col_code_nodes)} sensitive rows ({supply} safe slots)",
        )

    fwd = np.array(perm0.forward)
    col_sensitive = np.zeros(n, dtype=bool)
    col_sensitive[list(sets.row_code_nodes)] = True
    row_sensitive = np.zeros(k, dtype=bool)
    row_sensitive[list(sets.col_code_nodes)] = True
    src_col_safe = ~col_sensitive[np.arange(k * n) % n]
    image_safe = ~row_sensitive[fwd // n]  # maintained across swaps

    offenders = count_bad_mappings(perm0, sets).positions
    swaps = 0
    for r, c in offenders:
        if swaps >= max_attempts:
            raise InterleaverInfeasible(
                "attempts_exhausted", f"swap budget {max_attempts} exhausted"
            )
        p1 = r * n + c
        legal = np.flatnonzero(src_col_safe & image_safe)
        if len(legal) == 0:
            raise InterleaverInfeasible(
                "no_legal_partner",
                "every safe image is held by a sensitive-column position",
            )
        p2 = int(legal[rng.integers(len(legal))])
        fwd[p1], fwd[p2] = fwd[p2], fwd[p1]
        image_safe[p1], image_safe[p2] = image_safe[p2], image_safe[p1]
        swaps += 1
        if validate_each_swap:
            assert np.array_equal(np.sort(fwd), np.arange(k * n))

    result = BlockPermutation(
        K=k, N=n, forward=fwd, seed=perm0.seed,
        design_t=perm0.design_t, repairs=swaps, sets=sets,
    )
    remaining = count_bad_mappings(result, sets).count
    if remaining:
        raise InterleaverInfeasible(
            "attempts_exhausted", f"{remaining} bad mappings remain after repair"
        )
    return result


def escalate_design(
    hist_row: SensitivityHistogram,
    hist_col: SensitivityHistogram,
    perm0: BlockPermutation,
    rng: np.random.Generator,
    step: int = 1,
    max_attempts: int | None = None,
) -> BlockPermutation:
    """Grow the sensitive sets level by level until repair becomes infeasible.

    Level t takes the top-t nodes of each histogram (column-code nodes
    restricted to the systematic range) and repairs the original permutation
    against them; the last feasible level's result is returned with t in its
    metadata, falling back to ``perm0`` when the first level already fails.
    """
    if step < 1:
        raise ValueError("step must be >= 1")
    k, n = perm0.K, perm0.N
    best = perm0
    t = step
    while t <= max(n, k):
        sets = SensitiveSets(
            row_code_nodes=frozenset(select_sensitive(hist_row, t)),
            col_code_nodes=frozenset(select_sensitive(hist_col, t, restrict_below=k)),
        )
        try:
            attempt = design(perm0, sets, rng, max_attempts=max_attempts)
        except InterleaverInfeasible:
            break
        best = replace(attempt, design_t=t)
        t += step
    return best


# --- permutation file: "K N seed t" header then one "src dst" pair per line ----


def save_permutation(perm: BlockPermutation, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"{perm.K} {perm.N} {perm.seed} {perm.design_t}"]
    lines.extend(f"{src} {int(dst)}" for src, dst in enumerate(perm.forward))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_permutation(path: str | Path) -> BlockPermutation:
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise PermutationFileError(f"{path}: empty file")
    header = lines[0].split()
    if len(header) != 4:
        raise PermutationFileError(f"{path}: header must be 'K N seed t'")
    try:
        k, n, seed, t = (int(x) for x in header)
    except ValueError as exc:
        raise PermutationFileError(f"{path}: non-integer header field") from exc
    size = k * n
    if len(lines) != 1 + size:
        raise PermutationFileError(
            f"{path}: expected {size} mapping lines, found {len(lines) - 1}"
        )
    forward = np.empty(size, dtype=np.int64)
    seen = np.zeros(size, dtype=bool)
    for line_no, raw in enumerate(lines[1:], start=2):
        parts = raw.split()
        if len(parts) != 2:
            raise PermutationFileError(f"{path}: line {line_no}: expected 'src dst'")
        try:
            src, dst = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise PermutationFileError(f"{path}: line {line_no}: non-integer") from exc
        if not 0 <= src < size or not 0 <= dst < size:
            raise PermutationFileError(f"{path}: line {line_no}: index out of range")
        if seen[src]:
            raise PermutationFileError(f"{path}: line {line_no}: duplicate source {src}")
        seen[src] = True
        forward[src] = dst
    try:
        return BlockPermutation(K=k, N=n, forward=forward, seed=seed, design_t=t)
    except ValueError as exc:
        raise PermutationFileError(f"{path}: {exc}") from exc
