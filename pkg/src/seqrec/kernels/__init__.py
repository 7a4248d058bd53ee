"""Kernel backend selection.

The compiled extension (`._inner`, Cython) is preferred when built;
`.pure` is the numpy fallback with identical call signatures and the
same integer RNG stream. Set SEQREC_KERNEL=python or =c to force a
side (used by the benchmark and the parity tests).
"""

from __future__ import annotations

import logging
import os

from . import pure

logger = logging.getLogger(__name__)

try:
    from . import _inner as _compiled
except ImportError:
    _compiled = None

_choice = os.environ.get("SEQREC_KERNEL", "auto").strip().lower()
if _choice in ("", "auto"):
    _active = _compiled if _compiled is not None else pure
elif _choice in ("c", "compiled", "native"):
    if _compiled is None:
        raise ImportError(
            "SEQREC_KERNEL=c requested but the compiled kernel is not built"
        )
    _active = _compiled
elif _choice in ("python", "pure"):
    _active = pure
else:
    raise ImportError("unknown SEQREC_KERNEL value %r" % (_choice,))

BACKEND: str = getattr(_active, "BACKEND_NAME", "python")
if _compiled is None:
    logger.info("compiled kernels unavailable; using the numpy fallback")

train_epoch_sg = _active.train_epoch_sg
train_epoch_cbow = _active.train_epoch_cbow
lcs_length_i32 = _active.lcs_length_i32


def available_backends() -> dict[str, object]:
    """Importable kernel modules keyed by backend name."""
    out: dict[str, object] = {"python": pure}
    if _compiled is not None:
        out["c"] = _compiled
    return out


def get_backend(name: str):
    try:
        return available_backends()[name]
    except KeyError:
        raise ImportError("kernel backend %r is not available" % (name,)) from None
