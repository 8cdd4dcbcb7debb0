"""Pure-numpy reference implementations of the hot kernels.

Shapes use the conventions:
  xp   (L + n_s - 1, d_b)  zero-padded token features, window n_s
  w    (n_f, n_s, d_b)     convolution filters
  out  (n_f, L)            one feature row per filter
  fm   (n_f, L)            pooling input
  x    (T, d_in)           recurrent input sequence

The convolution accumulates window rows in order and channels sequentially
inside each row (numpy reduces axis 0 in index order, which keeps this
backend value-identical to an explicit nested loop).
"""

import numpy as np


def conv1d_forward(xp, w):
    n_f, n_s, d_b = w.shape
    length = xp.shape[0] - n_s + 1
    out = np.zeros((length, n_f))
    for k in range(n_s):
        block = xp[k:k + length].T[:, :, None] * w[:, k, :].T[:, None, :]
        out += block.sum(axis=0)
    return np.ascontiguousarray(out.T)


def conv1d_backward(xp, w, d_out):
    n_f, n_s, d_b = w.shape
    length = d_out.shape[1]
    d_xp = np.zeros_like(xp)
    d_w = np.zeros_like(w)
    for k in range(n_s):
        d_w[:, k, :] = d_out @ xp[k:k + length]
        d_xp[k:k + length] += d_out.T @ w[:, k, :]
    return d_xp, d_w


def segment_pool_forward(fm, cut1, cut2):
    n_f, length = fm.shape
    pooled = np.zeros((n_f, 3))
    argmax = np.full((n_f, 3), -1, dtype=np.int64)
    for s, (a, b) in enumerate(((0, cut1), (cut1, cut2), (cut2, length))):
        if b > a:
            seg = fm[:, a:b]
            pooled[:, s] = seg.max(axis=1)
            argmax[:, s] = a + seg.argmax(axis=1)
    return pooled, argmax


def segment_pool_backward(d_pooled, argmax, n_f, length):
    d_fm = np.zeros((n_f, length))
    for s in range(3):
        cols = argmax[:, s]
        live = cols >= 0
        d_fm[np.nonzero(live)[0], cols[live]] += d_pooled[live, s]
    return d_fm


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


def lstm_forward(x, w, u, b, h0, c0):
    t_len = x.shape[0]
    hidden = h0.shape[0]
    h = np.zeros((t_len, hidden))
    cache = np.zeros((6, t_len, hidden))
    h_prev = h0
    c_prev = c0
    for t in range(t_len):
        z = x[t] @ w + h_prev @ u + b
        gi = _sigmoid(z[:hidden])
        gf = _sigmoid(z[hidden:2 * hidden])
        gg = np.tanh(z[2 * hidden:3 * hidden])
        go = _sigmoid(z[3 * hidden:])
        c = gf * c_prev + gi * gg
        tc = np.tanh(c)
        h[t] = go * tc
        cache[0, t] = gi
        cache[1, t] = gf
        cache[2, t] = gg
        cache[3, t] = go
        cache[4, t] = c
        cache[5, t] = tc
        h_prev = h[t]
        c_prev = c
    return h, cache


def lstm_backward(x, w, u, h0, c0, h, cache, d_h):
    t_len, hidden = h.shape
    d_x = np.zeros_like(x)
    d_w = np.zeros_like(w)
    d_u = np.zeros_like(u)
    d_b = np.zeros(4 * hidden)
    dh = np.zeros(hidden)
    dc = np.zeros(hidden)
    dz = np.zeros(4 * hidden)
    for t in range(t_len - 1, -1, -1):
        gi, gf, gg, go, c, tc = cache[:, t]
        dh = dh + d_h[t]
        dc = dc + dh * go * (1.0 - tc * tc)
        c_prev = cache[4, t - 1] if t > 0 else c0
        h_prev = h[t - 1] if t > 0 else h0
        dz[:hidden] = dc * gg * gi * (1.0 - gi)
        dz[hidden:2 * hidden] = dc * c_prev * gf * (1.0 - gf)
        dz[2 * hidden:3 * hidden] = dc * gi * (1.0 - gg * gg)
        dz[3 * hidden:] = dh * tc * go * (1.0 - go)
        d_w += np.outer(x[t], dz)
        d_u += np.outer(h_prev, dz)
        d_b += dz
        d_x[t] = dz @ w.T
        dh = dz @ u.T
        dc = dc * gf
    return d_x, d_w, d_u, d_b, dh, dc
