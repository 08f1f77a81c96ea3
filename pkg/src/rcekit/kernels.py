"""Kernel selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
pure-Python implementation.  ``RCEKIT_BACKEND=python`` forces the fallback.
"""

import os

from . import _kernels_py

_force_python = os.environ.get("RCEKIT_BACKEND", "").lower() == "python"
_compiled = None
if not _force_python:
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _kernels_py

SYS_RCE, SYS_POLAR, SYS_LIN2 = _kernels_py.SYS_RCE, _kernels_py.SYS_POLAR, _kernels_py.SYS_LIN2
OK, UNDERFLOW, NONFINITE, MAX_STEPS, NO_RETURN = (
    _kernels_py.OK, _kernels_py.UNDERFLOW, _kernels_py.NONFINITE,
    _kernels_py.MAX_STEPS, _kernels_py.NO_RETURN)


def get_backend(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None for default)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel not available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def integrate(system, programs, funcs, t_out, y0, **kw):
    return _impl.integrate(system, programs, funcs, t_out, y0, **kw)
