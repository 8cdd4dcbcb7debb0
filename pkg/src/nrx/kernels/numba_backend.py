"""Numba-compiled kernels; same contracts as ``numpy_backend``.

The convolution keeps the canonical window-row-outer, channel-inner
accumulation order so both backends agree with the nested-loop oracle.
Compiled artifacts are cached on disk, so the first import pays the
compilation cost once.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv1d_forward(xp, w):
    n_f, n_s, d_b = w.shape
    length = xp.shape[0] - n_s + 1
    out = np.zeros((n_f, length))
    for f in range(n_f):
        for t in range(length):
            acc = 0.0
            for k in range(n_s):
                s = 0.0
                for c in range(d_b):
                    s += xp[t + k, c] * w[f, k, c]
                acc += s
            out[f, t] = acc
    return out


@njit(cache=True)
def conv1d_backward(xp, w, d_out):
    n_f, n_s, d_b = w.shape
    length = d_out.shape[1]
    d_xp = np.zeros_like(xp)
    d_w = np.zeros_like(w)
    for f in range(n_f):
        for t in range(length):
            g = d_out[f, t]
            for k in range(n_s):
                for c in range(d_b):
                    d_w[f, k, c] += g * xp[t + k, c]
                    d_xp[t + k, c] += g * w[f, k, c]
    return d_xp, d_w


@njit(cache=True)
def segment_pool_forward(fm, cut1, cut2):
    n_f, length = fm.shape
    pooled = np.zeros((n_f, 3))
    argmax = np.full((n_f, 3), -1, dtype=np.int64)
    bounds = ((0, cut1), (cut1, cut2), (cut2, length))
    for s in range(3):
        a, b = bounds[s]
        if b > a:
            for f in range(n_f):
                best = fm[f, a]
                best_i = a
                for t in range(a + 1, b):
                    if fm[f, t] > best:
                        best = fm[f, t]
                        best_i = t
                pooled[f, s] = best
                argmax[f, s] = best_i
    return pooled, argmax


@njit(cache=True)
def segment_pool_backward(d_pooled, argmax, n_f, length):
    d_fm = np.zeros((n_f, length))
    for f in range(n_f):
        for s in range(3):
            t = argmax[f, s]
            if t >= 0:
                d_fm[f, t] += d_pooled[f, s]
    return d_fm


@njit(cache=True)
def _sigmoid_vec(z):
    out = np.empty_like(z)
    for i in range(z.shape[0]):
        v = z[i]
        if v > 60.0:
            v = 60.0
        elif v < -60.0:
            v = -60.0
        out[i] = 1.0 / (1.0 + np.exp(-v))
    return out


@njit(cache=True)
def lstm_forward(x, w, u, b, h0, c0):
    t_len = x.shape[0]
    hidden = h0.shape[0]
    h = np.zeros((t_len, hidden))
    cache = np.zeros((6, t_len, hidden))
    h_prev = h0.copy()
    c_prev = c0.copy()
    for t in range(t_len):
        z = np.dot(x[t], w) + np.dot(h_prev, u) + b
        gi = _sigmoid_vec(z[:hidden])
        gf = _sigmoid_vec(z[hidden:2 * hidden])
        gg = np.tanh(z[2 * hidden:3 * hidden])
        go = _sigmoid_vec(z[3 * hidden:])
        c = gf * c_prev + gi * gg
        tc = np.tanh(c)
        ht = go * tc
        for j in range(hidden):
            h[t, j] = ht[j]
            cache[0, t, j] = gi[j]
            cache[1, t, j] = gf[j]
            cache[2, t, j] = gg[j]
            cache[3, t, j] = go[j]
            cache[4, t, j] = c[j]
            cache[5, t, j] = tc[j]
        h_prev = ht
        c_prev = c
    return h, cache


@njit(cache=True)
def lstm_backward(x, w, u, h0, c0, h, cache, d_h):
    t_len, hidden = h.shape
    d_in = x.shape[1]
    d_x = np.zeros_like(x)
    d_w = np.zeros_like(w)
    d_u = np.zeros_like(u)
    d_b = np.zeros(4 * hidden)
    dh = np.zeros(hidden)
    dc = np.zeros(hidden)
    dz = np.zeros(4 * hidden)
    for t in range(t_len - 1, -1, -1):
        for j in range(hidden):
            gi = cache[0, t, j]
            gf = cache[1, t, j]
            gg = cache[2, t, j]
            go = cache[3, t, j]
            tc = cache[5, t, j]
            c_prev = cache[4, t - 1, j] if t > 0 else c0[j]
            dhj = dh[j] + d_h[t, j]
            dcj = dc[j] + dhj * go * (1.0 - tc * tc)
            dz[j] = dcj * gg * gi * (1.0 - gi)
            dz[hidden + j] = dcj * c_prev * gf * (1.0 - gf)
            dz[2 * hidden + j] = dcj * gi * (1.0 - gg * gg)
            dz[3 * hidden + j] = dhj * tc * go * (1.0 - go)
            dc[j] = dcj * gf
        for a in range(d_in):
            xa = x[t, a]
            acc = 0.0
            for j in range(4 * hidden):
                d_w[a, j] += xa * dz[j]
                acc += dz[j] * w[a, j]
            d_x[t, a] = acc
        for p in range(hidden):
            hp = h[t - 1, p] if t > 0 else h0[p]
            acc = 0.0
            for j in range(4 * hidden):
                d_u[p, j] += hp * dz[j]
                acc += dz[j] * u[p, j]
            dh[p] = acc
        for j in range(4 * hidden):
            d_b[j] += dz[j]
    return d_x, d_w, d_u, d_b, dh, dc
