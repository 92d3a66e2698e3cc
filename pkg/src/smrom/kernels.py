"""Kernel backend selection.

The compiled extension is preferred when present; otherwise the NumPy
fallback is used.  Set SMROM_FORCE_PY=1 to force the fallback (used by the
cross-backend tests and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("SMROM_FORCE_PY") == "1":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

backend_name = _impl.BACKEND

mass_p2_local = _impl.mass_p2_local
stiffness_p2_local = _impl.stiffness_p2_local
graddiv_local = _impl.graddiv_local
divergence_local = _impl.divergence_local
convection_local = _impl.convection_local
p1_stiffness_local = _impl.p1_stiffness_local


def available_backends():
    """Mapping of backend name -> kernel module, for benchmarks/tests."""
    impls = {"numpy": _kernels_py}
    try:
        from . import _kernels
        impls["cython"] = _kernels
    except ImportError:
        pass
    return impls
