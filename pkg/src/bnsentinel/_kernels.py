"""Hot numeric kernels with numba-compiled and pure-numpy implementations.

Two inner loops dominate sampling-based work: ancestral sampling of
assignment codes, and per-sample surprise scoring against precomputed
log-probability tables. Both exist in a numba ``@njit`` version and a
vectorized numpy version that produce bit-identical results for the same
inputs. The numba path is used when available; set ``BNSENTINEL_NUMBA=0``
to force the numpy fallback (``benchmarks/bench_kernels.py`` compares the
two).
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

try:
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    _HAVE_NUMBA = False

_FALSEY = ("0", "false", "no", "off")


def numba_enabled() -> bool:
    """True when the numba kernels are importable and not disabled by env."""
    return _HAVE_NUMBA and os.environ.get("BNSENTINEL_NUMBA", "1").lower() not in _FALSEY


@dataclass(frozen=True)
class CompiledNet:
    """Flat-array view of a network for the sampling kernels.

    Nodes are laid out in topological order. ``parent_flat``/``stride_flat``
    are CSR-style per-node parent lists (parent positions refer to topo
    order); ``cpt_cum`` holds row-major cumulative CPT rows per node starting
    at ``row_off``. ``decl_pos[j]`` is the declaration-order column of topo
    node ``j``.
    """

    card: np.ndarray
    parent_flat: np.ndarray
    parent_off: np.ndarray
    stride_flat: np.ndarray
    cpt_cum: np.ndarray
    row_off: np.ndarray
    topo_names: tuple[str, ...]
    decl_pos: np.ndarray


def compile_net(net) -> CompiledNet:
    topo = net.topological_order()
    pos = {name: j for j, name in enumerate(topo)}
    nv = len(topo)
    card = np.array([net.variable(name).cardinality for name in topo], dtype=np.int64)

    parent_flat: list[int] = []
    stride_flat: list[int] = []
    parent_off = np.zeros(nv + 1, dtype=np.int64)
    blocks: list[np.ndarray] = []
    row_off = np.zeros(nv, dtype=np.int64)
    offset = 0
    for j, name in enumerate(topo):
        node = net.node(name)
        cards = [net.variable(p).cardinality for p in node.parents]
        # last parent varies fastest
        stride = 1
        strides = [0] * len(node.parents)
        for m in range(len(node.parents) - 1, -1, -1):
            strides[m] = stride
            stride *= cards[m]
        parent_flat.extend(pos[p] for p in node.parents)
        stride_flat.extend(strides)
        parent_off[j + 1] = len(parent_flat)
        cum = np.cumsum(node.cpt, axis=1).ravel()
        row_off[j] = offset
        offset += cum.size
        blocks.append(cum)

    decl_pos = np.array([list(net.names).index(name) for name in topo], dtype=np.int64)
    return CompiledNet(
        card=card,
        parent_flat=np.array(parent_flat, dtype=np.int64),
        parent_off=parent_off,
        stride_flat=np.array(stride_flat, dtype=np.int64),
        cpt_cum=np.concatenate(blocks),
        row_off=row_off,
        topo_names=tuple(topo),
        decl_pos=decl_pos,
    )


# -- ancestral sampling -----------------------------------------------------


def _ancestral_codes_np(card, parent_flat, parent_off, stride_flat, cpt_cum, row_off, uniforms):
    n = uniforms.shape[0]
    nv = card.shape[0]
    codes = np.zeros((n, nv), dtype=np.int64)
    for j in range(nv):
        k = card[j]
        row = np.zeros(n, dtype=np.int64)
        for m in range(parent_off[j], parent_off[j + 1]):
            row += codes[:, parent_flat[m]] * stride_flat[m]
        base = row_off[j] + row * k
        u = uniforms[:, j]
        out = np.zeros(n, dtype=np.int64)
        for t in range(k - 1):
            out += (u >= cpt_cum[base + t]).astype(np.int64)
        codes[:, j] = out
    return codes


def _ancestral_codes_loop(card, parent_flat, parent_off, stride_flat, cpt_cum, row_off, uniforms):
    n = uniforms.shape[0]
    nv = card.shape[0]
    codes = np.zeros((n, nv), dtype=np.int64)
    for i in range(n):
        for j in range(nv):
            k = card[j]
            row = 0
            for m in range(parent_off[j], parent_off[j + 1]):
                row += codes[i, parent_flat[m]] * stride_flat[m]
            base = row_off[j] + row * k
            u = uniforms[i, j]
            out = 0
            for t in range(k - 1):
                if u >= cpt_cum[base + t]:
                    out += 1
            codes[i, j] = out
    return codes


# -- per-sample surprise scores ----------------------------------------------


def _surprise_scores_np(codes, strides, log2_straw, log2_assessed):
    idx = codes @ strides
    with np.errstate(invalid="ignore"):
        return log2_straw[idx] - log2_assessed[idx]


def _surprise_scores_loop(codes, strides, log2_straw, log2_assessed):
    n = codes.shape[0]
    m = strides.shape[0]
    scores = np.empty(n, dtype=np.float64)
    for i in range(n):
        idx = 0
        for j in range(m):
            idx += codes[i, j] * strides[j]
        scores[i] = log2_straw[idx] - log2_assessed[idx]
    return scores


if _HAVE_NUMBA:
    _ancestral_codes_nb = numba.njit(cache=True, nogil=True)(_ancestral_codes_loop)
    _surprise_scores_nb = numba.njit(cache=True, nogil=True)(_surprise_scores_loop)
else:  # pragma: no cover
    _ancestral_codes_nb = _ancestral_codes_loop
    _surprise_scores_nb = _surprise_scores_loop


def ancestral_codes(compiled: CompiledNet, uniforms: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Sample outcome codes (topological column order) from uniform draws.

    ``uniforms`` has one column per topo-ordered node; code ``o`` is drawn
    for node ``j`` in sample ``i`` when ``uniforms[i, j]`` falls in that
    outcome's cumulative band of the active CPT row.
    """
    impl = _ancestral_codes_nb if _pick(backend) else _ancestral_codes_np
    return impl(
        compiled.card,
        compiled.parent_flat,
        compiled.parent_off,
        compiled.stride_flat,
        compiled.cpt_cum,
        compiled.row_off,
        uniforms,
    )


def surprise_scores(
    codes: np.ndarray,
    strides: np.ndarray,
    log2_straw: np.ndarray,
    log2_assessed: np.ndarray,
    backend: str | None = None,
) -> np.ndarray:
    """Per-sample ``log2 straw - log2 assessed`` from flat log tables.

    ``codes @ strides`` indexes both tables; entries may be ``-inf`` (zero
    probability), so scores can be ``+/-inf`` or ``nan`` when both sides
    vanish.
    """
    impl = _surprise_scores_nb if _pick(backend) else _surprise_scores_np
    return impl(codes, strides, log2_straw, log2_assessed)


def _pick(backend: str | None) -> bool:
    if backend is None:
        return numba_enabled()
    if backend == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return True
    if backend == "numpy":
        return False
    raise ValueError(f"unknown backend {backend!r}")
