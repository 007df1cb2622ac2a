"""Differentiable operations over `Tensor`; all accept leading batch axes."""
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.errors import NonPositiveDelta, ShapeMismatch
from src.numerics.tensor import Tensor, as_tensor, unbroadcast


def _lift(a, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(a, Tensor):
        return a
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(a, dtype=dtype))


# ----------------- ELEMENTWISE -----------------
def add(a, b) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    sa, sb = a.shape, b.shape
    return Tensor.make(
        a.data + b.data, (a, b),
        lambda g: (unbroadcast(g, sa), unbroadcast(g, sb)),
    )


def sub(a, b) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    sa, sb = a.shape, b.shape
    return Tensor.make(
        a.data - b.data, (a, b),
        lambda g: (unbroadcast(g, sa), unbroadcast(-g, sb)),
    )


def mul(a, b) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    sa, sb = a.shape, b.shape
    return Tensor.make(
        a.data * b.data, (a, b),
        lambda g: (unbroadcast(g * b.data, sa), unbroadcast(g * a.data, sb)),
    )


def div(a, b) -> Tensor:
    a, b = _lift(a, b if isinstance(b, Tensor) else None), _lift(b, a if isinstance(a, Tensor) else None)
    sa, sb = a.shape, b.shape
    out = a.data / b.data
    return Tensor.make(
        out, (a, b),
        lambda g: (unbroadcast(g / b.data, sa), unbroadcast(-g * out / b.data, sb)),
    )


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)
    return Tensor.make(out, (x,), lambda g: (g * out,))


def square(x: Tensor) -> Tensor:
    return Tensor.make(x.data ** 2, (x,), lambda g: (2.0 * g * x.data,))


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)
    return Tensor.make(out, (x,), lambda g: (g * 0.5 / out,))


def relu(x: Tensor) -> Tensor:
    on = x.data > 0
    return Tensor.make(np.where(on, x.data, 0.0).astype(x.dtype), (x,), lambda g: (g * on,))


def _sigmoid(v: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * v))


def silu(x: Tensor) -> Tensor:
    s = _sigmoid(x.data)
    return Tensor.make(x.data * s, (x,), lambda g: (g * (s * (1.0 + x.data * (1.0 - s))),))


def softplus(x: Tensor) -> Tensor:
    out = np.logaddexp(0.0, x.data).astype(x.dtype)
    return Tensor.make(out, (x,), lambda g: (g * _sigmoid(x.data),))


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    z = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return Tensor.make(y, (x,), backward)


def row_norm(x: Tensor) -> Tensor:
    """Euclidean norm over the last axis."""
    n = np.sqrt((x.data ** 2).sum(axis=-1))

    def backward(g):
        safe = np.where(n > 0, n, 1.0)
        return (np.where((n > 0)[..., None], x.data / safe[..., None], 0.0) * g[..., None],)

    return Tensor.make(n, (x,), backward)


# ----------------- REDUCTIONS / SHAPE -----------------
def sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    shape = x.shape

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return Tensor.make(x.data.sum(axis=axis, keepdims=keepdims), (x,), backward)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = x.data.size if axis is None else np.prod([x.shape[a] for a in np.atleast_1d(axis)])
    return div(sum(x, axis=axis, keepdims=keepdims), float(count))


def reshape(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    src = x.shape
    return Tensor.make(x.data.reshape(shape), (x,), lambda g: (g.reshape(src),))


def swapaxes(x: Tensor, a: int, b: int) -> Tensor:
    return Tensor.make(np.swapaxes(x.data, a, b), (x,), lambda g: (np.swapaxes(g, a, b),))


def index(x: Tensor, idx) -> Tensor:
    shape = x.shape
    parts = idx if isinstance(idx, tuple) else (idx,)
    basic = all(isinstance(p, (slice, int, type(Ellipsis))) or p is None for p in parts)

    def backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        if basic:
            full[idx] += g
        else:
            np.add.at(full, idx, g)
        return (full,)

    return Tensor.make(x.data[idx], (x,), backward)


def concat(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        return tuple(
            np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(tensors))
        )

    return Tensor.make(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward)


def shift_rows(x: Tensor, k: int) -> Tensor:
    """Causal shift along the time axis (-2): out[t] = x[t-k], zeros for t < k."""
    if k == 0:
        return x
    out = np.zeros_like(x.data)
    out[..., k:, :] = x.data[..., :-k, :]

    def backward(g):
        gx = np.zeros_like(g)
        gx[..., :-k, :] = g[..., k:, :]
        return (gx,)

    return Tensor.make(out, (x,), backward)


# ----------------- LINEAR ALGEBRA -----------------
def matmul(a, b) -> Tensor:
    a, b = _lift(a), _lift(b)
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeMismatch(f"matmul needs matrices, got {a.shape} @ {b.shape}")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeMismatch(f"matmul inner dims differ: {a.shape} @ {b.shape}")
    sa, sb = a.shape, b.shape

    def backward(g):
        ga = g @ np.swapaxes(b.data, -1, -2)
        gb = np.swapaxes(a.data, -1, -2) @ g
        return unbroadcast(ga, sa), unbroadcast(gb, sb)

    return Tensor.make(a.data @ b.data, (a, b), backward)


def affine_map(x: Tensor, W: Tensor, b: Optional[Tensor] = None) -> Tensor:
    """y = xW + b over the last axis."""
    x, W = as_tensor(x), as_tensor(W)
    if W.ndim != 2 or x.shape[-1] != W.shape[0]:
        raise ShapeMismatch(f"affine_map: x {x.shape} incompatible with W {W.shape}")
    y = matmul(x, W)
    if b is None:
        return y
    b = as_tensor(b)
    if b.shape != (W.shape[1],):
        raise ShapeMismatch(f"affine_map: bias {b.shape} does not match output dim {W.shape[1]}")
    return add(y, b)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Per-row normalization over the last axis followed by an affine map."""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    d = x.shape[-1]
    if d < 1 or gamma.shape != (d,) or beta.shape != (d,):
        raise ShapeMismatch(f"layer_norm: x {x.shape}, gamma {gamma.shape}, beta {beta.shape}")
    mu = x.data.mean(axis=-1, keepdims=True)
    var = x.data.var(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x.data - mu) * inv
    out = xhat * gamma.data + beta.data
    lead = tuple(range(x.ndim - 1))

    def backward(g):
        gxhat = g * gamma.data
        gx = inv * (
            gxhat
            - gxhat.mean(axis=-1, keepdims=True)
            - xhat * (gxhat * xhat).mean(axis=-1, keepdims=True)
        )
        return gx, (g * xhat).sum(axis=lead), g.sum(axis=lead)

    return Tensor.make(out, (x, gamma, beta), backward)


# ----------------- CONVOLUTION -----------------
def conv_output_size(n: int, kernel: int, stride: int, padding: int) -> int:
    return (n + 2 * padding - kernel) // stride + 1


def conv3d(
    grid: Tensor,
    weight: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """
    Cross-correlation of a (…, c, D, H, W) volume with a (c', c, k, k, k) kernel.
    Zero padding on all six faces.
    """
    grid, weight = as_tensor(grid), as_tensor(weight)
    batched = grid.ndim == 5
    if not batched and grid.ndim != 4:
        raise ShapeMismatch(f"conv3d expects c×D×H×W (or batched), got {grid.shape}")
    x = grid.data if batched else grid.data[None]
    nb, c, D, H, W = x.shape
    c_out, c_in, k = weight.shape[0], weight.shape[1], weight.shape[2]
    if c_in != c or weight.shape[2:] != (k, k, k):
        raise ShapeMismatch(f"conv3d: input channels {c} vs kernel {weight.shape}")
    if bias is not None and as_tensor(bias).shape != (c_out,):
        raise ShapeMismatch(f"conv3d: bias shape {as_tensor(bias).shape} != ({c_out},)")
    Do, Ho, Wo = (conv_output_size(n, k, stride, padding) for n in (D, H, W))
    if min(Do, Ho, Wo) <= 0:
        raise ShapeMismatch(f"conv3d: non-positive output dims {(Do, Ho, Wo)}")

    p = padding
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p), (p, p)))
    win = sliding_window_view(xp, (k, k, k), axis=(2, 3, 4))
    win = win[:, :, ::stride, ::stride, ::stride][:, :, :Do, :Ho, :Wo]
    # (nb, Do, Ho, Wo, c, k, k, k) -> (nb, P, c·k³)
    cols = np.ascontiguousarray(win.transpose(0, 2, 3, 4, 1, 5, 6, 7)).reshape(nb, Do * Ho * Wo, c * k ** 3)
    wmat = weight.data.reshape(c_out, -1)
    out = cols @ wmat.T
    if bias is not None:
        out = out + as_tensor(bias).data
    out = out.transpose(0, 2, 1).reshape(nb, c_out, Do, Ho, Wo)
    if not batched:
        out = out[0]

    def backward(g):
        gb = g if batched else g[None]
        gmat = gb.reshape(nb, c_out, -1).transpose(0, 2, 1)  # (nb, P, c_out)
        gw = np.einsum("npo,npk->ok", gmat, cols).reshape(weight.shape)
        gcols = (gmat @ wmat).reshape(nb, Do, Ho, Wo, c, k, k, k)
        gxp = np.zeros_like(xp)
        span = lambda off, n: slice(off, off + stride * (n - 1) + 1, stride)  # noqa: E731
        for a in range(k):
            for b_ in range(k):
                for cc in range(k):
                    gxp[:, :, span(a, Do), span(b_, Ho), span(cc, Wo)] += (
                        gcols[..., a, b_, cc].transpose(0, 4, 1, 2, 3)
                    )
        gx = gxp[:, :, p:p + D, p:p + H, p:p + W]
        if not batched:
            gx = gx[0]
        grads = [gx, gw]
        if bias is not None:
            grads.append(gb.sum(axis=(0, 2, 3, 4)))
        return tuple(grads)

    parents = (grid, weight) if bias is None else (grid, weight, as_tensor(bias))
    return Tensor.make(out, parents, backward)


# ----------------- ATTENTION -----------------
def _split_heads(x: Tensor, n_head: int) -> Tensor:
    *lead, n, d = x.shape
    return swapaxes(reshape(x, (*lead, n, n_head, d // n_head)), -2, -3)


def _merge_heads(x: Tensor) -> Tensor:
    x = swapaxes(x, -2, -3)
    *lead, n, h, dh = x.shape
    return reshape(x, (*lead, n, h * dh))


def multi_head_attention(
    Q: Tensor,
    K: Tensor,
    V: Tensor,
    n_head: int,
    projections: Sequence[Tuple[Tensor, Optional[Tensor]]],
    mask: Optional[np.ndarray] = None,
) -> Tuple[Tensor, np.ndarray]:
    """
    softmax(QpKpᵀ/sqrt(d/n_head))Vp per head, heads concatenated and output-projected.

    `projections` holds (W, b) pairs for the query, key, value and output maps.
    `mask` is boolean (nq × nk), True where attention is allowed.
    Returns the output and the attention weights (…, n_head, nq, nk).
    """
    Q, K, V = as_tensor(Q), as_tensor(K), as_tensor(V)
    d = Q.shape[-1]
    if d % n_head != 0:
        raise ShapeMismatch(f"model dim {d} not divisible by n_head={n_head}")
    if K.shape[-1] != d or V.shape[-1] != d or K.shape[-2] != V.shape[-2]:
        raise ShapeMismatch(f"attention shapes Q {Q.shape}, K {K.shape}, V {V.shape}")
    (wq, bq), (wk, bk), (wv, bv), (wo, bo) = projections

    q = _split_heads(affine_map(Q, wq, bq), n_head)
    k = _split_heads(affine_map(K, wk, bk), n_head)
    v = _split_heads(affine_map(V, wv, bv), n_head)
    scores = matmul(q, swapaxes(k, -1, -2)) * (1.0 / np.sqrt(d // n_head))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (Q.shape[-2], K.shape[-2]):
            raise ShapeMismatch(f"attention mask {mask.shape} != {(Q.shape[-2], K.shape[-2])}")
        scores = add(scores, np.where(mask, 0.0, -1e9).astype(scores.dtype))
    weights = softmax(scores, axis=-1)
    out = _merge_heads(matmul(weights, v))
    return affine_map(out, wo, bo), weights.data


# ----------------- SELECTIVE SCAN -----------------
def selective_scan(
    x: Tensor,
    delta: Tensor,
    A: Tensor,
    B: Tensor,
    C: Tensor,
) -> Tensor:
    """
    Discretized input-dependent state-space recurrence over the time axis (-2):

        h_t = exp(Δ_t·A) ⊙ h_{t-1} + (Δ_t·B_t) x_t,   y_t = C_t·h_t,   h_0 = 0

    x, delta: (…, T, d_inner); A: (d_inner, d_state); B, C: (…, T, d_state).
    """
    x, delta, A, B, C = (as_tensor(t) for t in (x, delta, A, B, C))
    *lead, T, d_inner = x.shape
    d_state = A.shape[-1]
    if delta.shape != x.shape or A.shape != (d_inner, d_state):
        raise ShapeMismatch(f"scan: x {x.shape}, delta {delta.shape}, A {A.shape}")
    if B.shape != (*lead, T, d_state) or C.shape != B.shape:
        raise ShapeMismatch(f"scan: B {B.shape} / C {C.shape} must be {(*lead, T, d_state)}")
    if np.any(delta.data <= 0):
        raise NonPositiveDelta("selective_scan requires delta > 0 everywhere")

    xd, dd, Ad, Bd, Cd = x.data, delta.data, A.data, B.data, C.data
    dA = np.exp(dd[..., None] * Ad)                      # (…, T, d_inner, d_state)
    dBx = (dd * xd)[..., None] * Bd[..., None, :]         # (…, T, d_inner, d_state)
    hs = np.zeros((*lead, T + 1, d_inner, d_state), dtype=xd.dtype)
    for t in range(T):
        hs[..., t + 1, :, :] = dA[..., t, :, :] * hs[..., t, :, :] + dBx[..., t, :, :]
    y = np.einsum("...tis,...ts->...ti", hs[..., 1:, :, :], Cd)

    def backward(g):
        gh = np.zeros((*lead, d_inner, d_state), dtype=xd.dtype)
        g_dA = np.zeros_like(dA)
        g_dBx = np.zeros_like(dBx)
        gC = np.einsum("...ti,...tis->...ts", g, hs[..., 1:, :, :])
        for t in range(T - 1, -1, -1):
            gh = gh + g[..., t, :, None] * Cd[..., t, None, :]
            g_dA[..., t, :, :] = gh * hs[..., t, :, :]
            g_dBx[..., t, :, :] = gh
            gh = gh * dA[..., t, :, :]
        g_expo = g_dA * dA                                # d/d(Δ·A)
        g_delta = (g_expo * Ad).sum(axis=-1) + (g_dBx * Bd[..., None, :]).sum(axis=-1) * xd
        lead_axes = tuple(range(len(lead) + 1))
        gA = (g_expo * dd[..., None]).sum(axis=lead_axes)
        gB = np.einsum("...tis,...ti->...ts", g_dBx, dd * xd)
        gx = (g_dBx * Bd[..., None, :]).sum(axis=-1) * dd
        return gx, g_delta, gA, gB, gC

    return Tensor.make(y, (x, delta, A, B, C), backward)


def sequential_scan_reference(x, delta, A, B, C) -> np.ndarray:
    """Plain per-element loop over the same recurrence, for 2D inputs."""
    x, delta, A, B, C = (np.asarray(v, dtype=np.float64) for v in (x, delta, A, B, C))
    T, d_inner = x.shape
    d_state = A.shape[1]
    h = np.zeros((d_inner, d_state))
    y = np.zeros((T, d_inner))
    for t in range(T):
        for i in range(d_inner):
            for s in range(d_state):
                h[i, s] = np.exp(delta[t, i] * A[i, s]) * h[i, s] + delta[t, i] * B[t, s] * x[t, i]
            y[t, i] = float(np.dot(h[i], C[t]))
    return y
