"""Reference negative-sampling objective in float64.

This is the differentiable definition the kernels implement with SGD:
the composed vector h is the arithmetic mean of the contributing input
rows, each target contributes log-sigmoid loss with label 1 (positive)
or 0 (negative), and the gradient w.r.t. every contributing row is the
gradient w.r.t. h divided by the number of rows. Used by the
finite-difference oracle and the kernel parity tests.
"""

from __future__ import annotations

import numpy as np


def _sigmoid(f):
    return 1.0 / (1.0 + np.exp(-f))


def pair_loss(rows: np.ndarray, ctx_rows: np.ndarray, labels: np.ndarray) -> float:
    """Loss of one composed-vector update instance.

    rows: (n_rows, dim) contributing input rows; ctx_rows:
    (n_targets, dim) context vectors; labels: (n_targets,) in {0, 1}.
    """
    rows = np.asarray(rows, dtype=np.float64)
    ctx_rows = np.asarray(ctx_rows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    h = rows.mean(axis=0)
    f = ctx_rows @ h
    # softplus(-f) for label 1, softplus(f) for label 0, stably
    return float(np.logaddexp(0.0, np.where(labels > 0.0, -f, f)).sum())


def pair_gradients(
    rows: np.ndarray, ctx_rows: np.ndarray, labels: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of pair_loss w.r.t. rows and ctx_rows.

    dL/df_t = sigmoid(f_t) - label_t; dL/dh = sum_t dL/df_t * ctx_t;
    dL/drow_i = dL/dh / n_rows; dL/dctx_t = dL/df_t * h.
    """
    rows = np.asarray(rows, dtype=np.float64)
    ctx_rows = np.asarray(ctx_rows, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    n_rows = rows.shape[0]
    h = rows.mean(axis=0)
    f = ctx_rows @ h
    dldf = _sigmoid(f) - labels
    dldh = dldf @ ctx_rows
    grad_rows = np.tile(dldh / n_rows, (n_rows, 1))
    grad_ctx = dldf[:, None] * h[None, :]
    return grad_rows, grad_ctx
