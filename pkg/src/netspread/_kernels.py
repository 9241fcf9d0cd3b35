"""Numba kernels for the hot message-passing loops.

The sweep visits each node's in-arc segment once (arc ids are in-CSR
positions), forms exact leave-one-out products with a forward/backward pass,
and scatters the resulting messages through a bin-sorted schedule so writes
stay cache-local.  No division: leave-one-out products must survive factors
that are exactly zero (b * message == 1).
"""

from numba import njit


@njit(cache=True)
def ic_sweep(in_offsets, b, omp0_dst, slot, scatter_targets,
             unpaired, unpaired_src, omp0_unpaired, msg, loo, binbuf, full, out):
    """One synchronous update of all arc messages (old buffer -> out)."""
    n = in_offsets.size - 1
    for j in range(n):
        s, e = in_offsets[j], in_offsets[j + 1]
        acc = 1.0
        for pos in range(s, e):
            loo[pos] = acc
            acc *= 1.0 - b[pos] * msg[pos]
        full[j] = acc
        acc = 1.0
        for pos in range(e - 1, s - 1, -1):
            prod = loo[pos] * acc
            binbuf[slot[pos]] = 1.0 - omp0_dst[pos] * prod
            acc *= 1.0 - b[pos] * msg[pos]
    for idx in range(scatter_targets.size):
        out[scatter_targets[idx]] = binbuf[idx]
    for k in range(unpaired.size):
        out[unpaired[k]] = 1.0 - omp0_unpaired[k] * full[unpaired_src[k]]


@njit(cache=True)
def ic_node_products(in_offsets, b, msg, full):
    """Per-node product of (1 - b * message) over incoming arcs."""
    n = in_offsets.size - 1
    for j in range(n):
        acc = 1.0
        for pos in range(in_offsets[j], in_offsets[j + 1]):
            acc *= 1.0 - b[pos] * msg[pos]
        full[j] = acc
