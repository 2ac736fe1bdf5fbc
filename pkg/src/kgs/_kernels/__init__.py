"""Numeric kernels with a compiled core and a pure numpy fallback.

The compiled extension (``_ckern``, built from Cython) is preferred; when
it is not importable the numpy backend is used.  ``KGS_KERNELS`` forces a
choice: ``c`` (fail if the extension is missing) or ``python``.
"""

import importlib
import os

_choice = os.environ.get("KGS_KERNELS", "").strip().lower()
if _choice not in ("", "c", "python"):
    raise RuntimeError(f"KGS_KERNELS must be 'c' or 'python', got {_choice!r}")

if _choice == "python":
    from . import numpy_backend as _impl

    BACKEND = "python"
else:
    try:
        from . import _ckern as _impl

        BACKEND = "c"
    except ImportError:
        if _choice == "c":
            raise
        from . import numpy_backend as _impl

        BACKEND = "python"

laplacian = _impl.laplacian
gradient_form = _impl.gradient_form
stiffness_apply = _impl.stiffness_apply
edge_pairing = _impl.edge_pairing
edge_pairing_masked = _impl.edge_pairing_masked
mass_dot = _impl.mass_dot
mass_pow = _impl.mass_pow
mass_cubic_dot = _impl.mass_cubic_dot


def available_backends():
    """Names of importable backends, compiled one first."""
    names = []
    try:
        importlib.import_module("kgs._kernels._ckern")
        names.append("c")
    except ImportError:
        pass
    names.append("python")
    return names


def get_backend(name):
    """Return the backend module for ``name`` ('c' or 'python')."""
    if name == "python":
        return importlib.import_module("kgs._kernels.numpy_backend")
    if name == "c":
        return importlib.import_module("kgs._kernels._ckern")
    raise ValueError(f"unknown backend {name!r}")
