"""Mixed-radix decimation-in-time DFT along arbitrary axes."""
import numpy as np


def _smallest_factor(n):
    f = 2
    while f * f <= n:
        if n % f == 0:
            return f
        f += 1
    return n


def _dft_last(x, sign):
    N = x.shape[-1]
    if N == 1:
        return x.copy()
    r = _smallest_factor(N)
    if r == N:
        k = np.arange(N)
        W = np.exp(sign * 2j * np.pi * np.outer(k, k) / N)
        return x @ W
    m = N // r
    # r interleaved sub-transforms of length m, recombined with twiddles
    sub = np.stack([_dft_last(x[..., j::r], sign) for j in range(r)], axis=-2)
    k = np.arange(N)
    tw = np.exp(sign * 2j * np.pi * np.outer(np.arange(r), k) / N)
    return (tw * sub[..., k % m]).sum(axis=-2)


def dft(x, axis=-1, sign=-1):
    """Unnormalised DFT sum_j x_j exp(sign * 2 pi i j k / N) along one axis."""
    x = np.moveaxis(np.asarray(x, dtype=complex), axis, -1)
    return np.moveaxis(_dft_last(x, sign), -1, axis)


def dftn(x, axes=None, sign=-1):
    x = np.asarray(x, dtype=complex)
    axes = range(x.ndim) if axes is None else axes
    for ax in axes:
        x = dft(x, ax, sign)
    return x


def naive_dftn(x, sign=-1):
    """O(N^2) reference transform over all axes."""
    x = np.asarray(x, dtype=complex)
    shape = x.shape
    idx = np.array(list(np.ndindex(*shape)))
    phase = np.zeros((len(idx), len(idx)))
    for ax, N in enumerate(shape):
        phase += np.outer(idx[:, ax], idx[:, ax]) / N
    out = np.exp(sign * 2j * np.pi * phase) @ x.reshape(-1)
    return out.reshape(shape)
