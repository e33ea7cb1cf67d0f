"""Hot numeric kernels, each in a numba and a pure-numpy variant.

Public dispatchers (``accumulate_targets``, ``cfar_threshold_map``,
``mean_shift_modes``) pick the variant once at import time based on
:mod:`radar_annotate.accel`. The ``*_numpy`` / ``*_numba`` twins remain
importable for cross-checking and benchmarks; they compute the same
quantities and differ only in float summation order.
"""

import numpy as np

from .accel import USE_NUMBA, njit

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# IF-cube accumulation: per target a separable complex exponential over
# (antenna, chirp, sample) with per-index phase steps.
# ---------------------------------------------------------------------------

def accumulate_targets_numpy(cube, amps, phase_samp, phase_chirp, phase_ant):
    n_ant, n_chirp, n_samp = cube.shape
    k = np.arange(n_ant)
    m = np.arange(n_chirp)
    n = np.arange(n_samp)
    for amp, pr, pd, pa in zip(amps, phase_samp, phase_chirp, phase_ant):
        e_a = np.exp(1j * pa * k)
        e_d = np.exp(1j * pd * m)
        e_r = np.exp(1j * pr * n)
        cube += amp * (e_a[:, None, None] * e_d[None, :, None] * e_r[None, None, :])
    return cube


@njit(cache=True)
def accumulate_targets_numba(cube, amps, phase_samp, phase_chirp, phase_ant):
    n_ant, n_chirp, n_samp = cube.shape
    for t in range(amps.shape[0]):
        amp = amps[t]
        for k in range(n_ant):
            pk = phase_ant[t] * k
            for m in range(n_chirp):
                pkm = pk + phase_chirp[t] * m
                for n in range(n_samp):
                    phase = pkm + phase_samp[t] * n
                    cube[k, m, n] += amp * (np.cos(phase) + 1j * np.sin(phase))
    return cube


# ---------------------------------------------------------------------------
# 2D cell-averaging CFAR threshold. Training band is the square annulus
# between the guard box and the train+guard box, truncated at map edges;
# the scale alpha = N (pfa^(-1/N) - 1) uses each cell's actual training
# count so the false-alarm rate stays calibrated at the borders.
# ---------------------------------------------------------------------------

def cfar_threshold_map_numpy(power, train, guard, pfa):
    h, w = power.shape
    sat = np.zeros((h + 1, w + 1), dtype=np.float64)
    sat[1:, 1:] = np.cumsum(np.cumsum(power, axis=0), axis=1)

    def box_sum_and_count(half):
        i = np.arange(h)
        j = np.arange(w)
        i0 = np.clip(i - half, 0, h)[:, None]
        i1 = np.clip(i + half + 1, 0, h)[:, None]
        j0 = np.clip(j - half, 0, w)[None, :]
        j1 = np.clip(j + half + 1, 0, w)[None, :]
        s = sat[i1, j1] - sat[i0, j1] - sat[i1, j0] + sat[i0, j0]
        count = (i1 - i0) * (j1 - j0)
        return s, count

    outer_sum, outer_n = box_sum_and_count(train + guard)
    inner_sum, inner_n = box_sum_and_count(guard)
    train_sum = outer_sum - inner_sum
    n_train = (outer_n - inner_n).astype(np.float64)
    alpha = n_train * (np.power(pfa, -1.0 / n_train) - 1.0)
    return alpha * train_sum / n_train


@njit(cache=True)
def cfar_threshold_map_numba(power, train, guard, pfa):
    h, w = power.shape
    out = np.empty((h, w), dtype=np.float64)
    half = train + guard
    for i in range(h):
        i0 = max(i - half, 0)
        i1 = min(i + half + 1, h)
        gi0 = max(i - guard, 0)
        gi1 = min(i + guard + 1, h)
        for j in range(w):
            j0 = max(j - half, 0)
            j1 = min(j + half + 1, w)
            gj0 = max(j - guard, 0)
            gj1 = min(j + guard + 1, w)
            acc = 0.0
            for r in range(i0, i1):
                for c in range(j0, j1):
                    acc += power[r, c]
            guard_acc = 0.0
            for r in range(gi0, gi1):
                for c in range(gj0, gj1):
                    guard_acc += power[r, c]
            n_train = (i1 - i0) * (j1 - j0) - (gi1 - gi0) * (gj1 - gj0)
            acc -= guard_acc
            alpha = n_train * (pfa ** (-1.0 / n_train) - 1.0)
            out[i, j] = alpha * acc / n_train
    return out


# ---------------------------------------------------------------------------
# Mean-shift: iterate every start point to its kernel-weighted local mean
# until the step falls below tol. Each trajectory depends only on its own
# position and the static data, so per-point and lockstep iteration agree.
# ---------------------------------------------------------------------------

def mean_shift_modes_numpy(data, starts, sigma, tol, max_iter):
    x = starts.astype(np.float64).copy()
    n_pts = x.shape[0]
    iters = np.zeros(n_pts, dtype=np.int64)
    converged = np.zeros(n_pts, dtype=np.bool_)
    active = np.ones(n_pts, dtype=np.bool_)
    inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma)
    for _ in range(max_iter):
        if not active.any():
            break
        cur = x[active]
        diff = cur[:, None, :] - data[None, :, :]
        w = np.exp(-(diff * diff).sum(axis=2) * inv_two_sigma2)
        new = (w @ data) / w.sum(axis=1)[:, None]
        step = np.sqrt(((new - cur) ** 2).sum(axis=1))
        x[active] = new
        iters[active] += 1
        done = step < tol
        conv_idx = np.flatnonzero(active)[done]
        converged[conv_idx] = True
        active[conv_idx] = False
    return x, iters, converged


@njit(cache=True)
def mean_shift_modes_numba(data, starts, sigma, tol, max_iter):
    n_pts, dim = starts.shape
    n_data = data.shape[0]
    x = starts.astype(np.float64).copy()
    iters = np.zeros(n_pts, dtype=np.int64)
    converged = np.zeros(n_pts, dtype=np.bool_)
    inv_two_sigma2 = 1.0 / (2.0 * sigma * sigma)
    new = np.empty(dim, dtype=np.float64)
    for p in range(n_pts):
        for it in range(max_iter):
            wsum = 0.0
            for d in range(dim):
                new[d] = 0.0
            for i in range(n_data):
                d2 = 0.0
                for d in range(dim):
                    delta = x[p, d] - data[i, d]
                    d2 += delta * delta
                w = np.exp(-d2 * inv_two_sigma2)
                wsum += w
                for d in range(dim):
                    new[d] += w * data[i, d]
            step2 = 0.0
            for d in range(dim):
                new[d] /= wsum
                delta = new[d] - x[p, d]
                step2 += delta * delta
                x[p, d] = new[d]
            iters[p] = it + 1
            if step2 < tol * tol:
                converged[p] = True
                break
    return x, iters, converged


if USE_NUMBA:
    accumulate_targets = accumulate_targets_numba
    cfar_threshold_map = cfar_threshold_map_numba
    mean_shift_modes = mean_shift_modes_numba
else:
    accumulate_targets = accumulate_targets_numpy
    cfar_threshold_map = cfar_threshold_map_numpy
    mean_shift_modes = mean_shift_modes_numpy
