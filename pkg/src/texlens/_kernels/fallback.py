"""Pure-numpy kernel implementations, used when the extension is absent."""

import numpy as np

# Cap the broadcast diff buffer at ~32 MB so huge indexes stay chunked.
_CHUNK_BYTES = 4 << 20


def pairwise_distances(a, b):
    m = a.shape[0]
    out = np.empty((m, b.shape[0]), dtype=np.float64)
    step = max(1, _CHUNK_BYTES // max(1, b.size))
    for i in range(0, m, step):
        diff = a[i : i + step, None, :] - b[None, :, :]
        np.sqrt(np.einsum("ijk,ijk->ij", diff, diff), out=out[i : i + step])
    return out


def smoe_map(x, eps):
    v = np.maximum(x, eps)
    mu = v.mean(axis=0)
    return (v * np.log(v / mu)).mean(axis=0)
