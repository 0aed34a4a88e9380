"""Log-domain sum-product decoding with a-priori input and extrinsic output.

LLR sign convention: positive favors bit 0.  The flooding schedule updates
all checks, then all variables, once per iteration; decoding stops at the
first iteration whose hard decision satisfies every check.  The extrinsic
output for a variable is the sum of its final check-to-variable messages,
excluding both the channel and the prior term, so the value can be handed
to another decoder that holds its own copy of the channel observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .gf2 import SparseBinaryMatrix

__all__ = [
    "LLR_CLAMP",
    "DecodeResult",
    "BatchDecodeResult",
    "check_update",
    "variable_update",
    "decode",
    "decode_batch",
]

LLR_CLAMP = 50.0  # applied to variable-to-check messages before tanh
_ATANH_GUARD = 1.0 - 1e-12  # keeps products away from +-1 before arctanh


@dataclass(frozen=True)
class DecodeResult:
    hard_bits: np.ndarray
    posterior: np.ndarray
    extrinsic: np.ndarray
    iterations_used: int
    valid: bool


@dataclass(frozen=True)
class BatchDecodeResult:
    """Per-row results of decoding a batch of independent LLR vectors."""

    hard_bits: np.ndarray  # (B, N) uint8
    posterior: np.ndarray  # (B, N)
    extrinsic: np.ndarray  # (B, N)
    iterations_used: np.ndarray  # (B,)
    valid: np.ndarray  # (B,) bool


def check_update(incoming) -> np.ndarray:
    """Outgoing message per edge of one check: 2*atanh of the product of the
    other edges' tanh(L/2) terms, with clamp guards."""
    inc = np.asarray(incoming, dtype=np.float64)
    if inc.ndim != 1 or inc.size < 1:
        raise ValueError("check_update needs a flat list of at least one message")
    t = np.tanh(0.5 * np.clip(inc, -LLR_CLAMP, LLR_CLAMP))
    prefix = np.concatenate([[1.0], np.cumprod(t)[:-1]])
    suffix = np.concatenate([np.cumprod(t[::-1])[-2::-1], [1.0]])
    return 2.0 * np.arctanh(np.clip(prefix * suffix, -_ATANH_GUARD, _ATANH_GUARD))


def variable_update(channel: float, prior: float, incoming_checks) -> tuple[np.ndarray, float]:
    """Messages to each check (total minus that check's input) and the posterior."""
    inc = np.asarray(incoming_checks, dtype=np.float64)
    total = float(channel) + float(prior) + inc.sum()
    return total - inc, total


@dataclass(frozen=True, eq=False)
class _CompiledGraph:
    """Flat edge indexing for vectorized flooding updates.

    Edges are kept in row-major (check-grouped) order; each edge knows its
    (check, slot) and (variable, slot) coordinates so messages scatter into
    dense padded (n_checks, max_check_deg) and (n_vars, max_var_deg) planes.
    """

    n_checks: int
    n_vars: int
    n_edges: int
    edge_var: np.ndarray
    check_of: np.ndarray
    check_slot: np.ndarray
    var_slot: np.ndarray
    max_check_deg: int
    max_var_deg: int


@lru_cache(maxsize=64)
def _compile(matrix: SparseBinaryMatrix) -> _CompiledGraph:
    edge_var = matrix._edge_cols
    check_of = matrix._edge_rows
    check_deg = np.array([len(r) for r in matrix.row_support])
    var_deg = np.array([len(c) for c in matrix.col_support])
    check_slot = np.concatenate([np.arange(d) for d in check_deg]) if len(edge_var) else np.zeros(0, np.intp)
    next_slot = np.zeros(matrix.n_cols, dtype=np.intp)
    var_slot = np.zeros(len(edge_var), dtype=np.intp)
    for e, v in enumerate(edge_var):
        var_slot[e] = next_slot[v]
        next_slot[v] += 1
    return _CompiledGraph(
        n_checks=matrix.n_rows,
        n_vars=matrix.n_cols,
        n_edges=len(edge_var),
        edge_var=edge_var,
        check_of=check_of,
        check_slot=check_slot.astype(np.intp),
        var_slot=var_slot,
        max_check_deg=int(check_deg.max(initial=0)),
        max_var_deg=int(var_deg.max(initial=0)),
    )


def _as_matrix(code_or_matrix) -> SparseBinaryMatrix:
    h = getattr(code_or_matrix, "H", code_or_matrix)
    if not isinstance(h, SparseBinaryMatrix):
        raise TypeError("expected an IraCode or SparseBinaryMatrix")
    return h


def decode_batch(
    code_or_matrix,
    channel,
    prior=None,
    max_iter: int = 100,
    early_stop: bool = True,
) -> BatchDecodeResult:
    """Decode B independent LLR vectors against one parity-check matrix.

    Rows that produce a zero syndrome stop updating immediately (their
    messages and outputs freeze), so results per row are identical to
    decoding that row on its own.  With ``early_stop=False`` every row runs
    all ``max_iter`` iterations, which is what an exactness comparison
    against true marginals wants.
    """
    h = _as_matrix(code_or_matrix)
    g = _compile(h)
    channel = np.atleast_2d(np.asarray(channel, dtype=np.float64))
    if channel.shape[1] != g.n_vars:
        raise ValueError(f"channel LLR rows must have length {g.n_vars}")
    if prior is None:
        prior = np.zeros_like(channel)
    else:
        prior = np.atleast_2d(np.asarray(prior, dtype=np.float64))
    if prior.shape != channel.shape:
        raise ValueError("prior shape must match channel shape")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")

    batch = channel.shape[0]
    lam = channel + prior
    msg_vc = lam[:, g.edge_var].copy()

    posterior = lam.copy()
    extrinsic = np.zeros_like(lam)
    hard = (posterior < 0).astype(np.uint8)
    iterations = np.zeros(batch, dtype=np.int64)
    valid = np.zeros(batch, dtype=bool)

    active = np.arange(batch)
    for it in range(1, max_iter + 1):
        m = np.clip(msg_vc[active], -LLR_CLAMP, LLR_CLAMP)
        t = np.ones((len(active), g.n_checks, g.max_check_deg))
        t[:, g.check_of, g.check_slot] = np.tanh(0.5 * m)
        cp = np.cumprod(t, axis=2)
        prefix = np.concatenate([np.ones_like(t[:, :, :1]), cp[:, :, :-1]], axis=2)
        rcp = np.cumprod(t[:, :, ::-1], axis=2)[:, :, ::-1]
        suffix = np.concatenate([rcp[:, :, 1:], np.ones_like(t[:, :, :1])], axis=2)
        prod_other = (prefix * suffix)[:, g.check_of, g.check_slot]
        msg_cv = 2.0 * np.arctanh(np.clip(prod_other, -_ATANH_GUARD, _ATANH_GUARD))

        planes = np.zeros((len(active), g.n_vars, g.max_var_deg))
        planes[:, g.edge_var, g.var_slot] = msg_cv
        ext = planes.sum(axis=2)
        post = lam[active] + ext
        msg_vc[active] = post[:, g.edge_var] - msg_cv

        bits = (post < 0).astype(np.uint8)
        sat = np.zeros((len(active), g.n_checks, g.max_check_deg), dtype=np.uint8)
        sat[:, g.check_of, g.check_slot] = bits[:, g.edge_var]
        zero_syndrome = ~((sat.sum(axis=2) & 1).any(axis=1))

        posterior[active] = post
        extrinsic[active] = ext
        hard[active] = bits
        iterations[active] = it
        if early_stop:
            valid[active[zero_syndrome]] = True
            active = active[~zero_syndrome]
            if len(active) == 0:
                break
        else:
            valid[active] = zero_syndrome

    return BatchDecodeResult(hard, posterior, extrinsic, iterations, valid)


def decode(
    code_or_matrix,
    channel,
    prior=None,
    max_iter: int = 100,
    early_stop: bool = True,
) -> DecodeResult:
    """Decode one LLR vector; see :func:`decode_batch` for semantics."""
    channel = np.asarray(channel, dtype=np.float64)
    if channel.ndim != 1:
        raise ValueError("decode expects a flat LLR vector")
    res = decode_batch(
        code_or_matrix,
        channel[np.newaxis, :],
        None if prior is None else np.asarray(prior, dtype=np.float64)[np.newaxis, :],
        max_iter=max_iter,
        early_stop=early_stop,
    )
    return DecodeResult(
        hard_bits=res.hard_bits[0],
        posterior=res.posterior[0],
        extrinsic=res.extrinsic[0],
        iterations_used=int(res.iterations_used[0]),
        valid=bool(res.valid[0]),
    )
