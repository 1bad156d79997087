"""Backend selection for the hot kernels.

The compiled extension is used when it imports; setting the environment
variable ``SH2SYNTH_PURE=1`` forces the pure-Python fallback.  ``BACKEND``
names the active implementation.
"""
from __future__ import annotations

import os

if os.environ.get("SH2SYNTH_PURE", "") not in ("", "0"):
    from . import _pykernels as _impl
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _pykernels as _impl
        BACKEND = "python"

exp_point = _impl.exp_point
exp_mid_point = _impl.exp_mid_point
exp_batch = _impl.exp_batch
exp_mid_batch = _impl.exp_mid_batch
jacobi_batch = _impl.jacobi_batch
eps_batch = _impl.eps_batch
jacobian_det_point = _impl.jacobian_det_point
conj_time_batch = _impl.conj_time_batch
p11_root_point = _impl.p11_root_point
rk4_batch = _impl.rk4_batch

__all__ = [
    "BACKEND",
    "conj_time_batch",
    "eps_batch",
    "exp_batch",
    "exp_mid_batch",
    "exp_mid_point",
    "exp_point",
    "jacobi_batch",
    "jacobian_det_point",
    "p11_root_point",
    "rk4_batch",
]
