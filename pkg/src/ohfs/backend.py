"""Kernel backend selection.

The compiled extension (``ohfs._core``) is preferred when it imported cleanly;
otherwise the numpy fallback is used.  Set ``OHFS_BACKEND=python`` or
``OHFS_BACKEND=compiled`` to force a choice (the latter raises if the
extension is unavailable).  Both backends satisfy the same contracts; only
the compiled one is fast enough for very large Monte-Carlo runs in tight
time budgets.
"""

import os

from . import _kernels_py

try:
    from . import _core
except ImportError:
    _core = None


def available_backends():
    names = ["python"]
    if _core is not None:
        names.insert(0, "compiled")
    return names


def get_kernels(name="auto"):
    """Return the kernel module for ``name`` ('auto', 'compiled' or 'python')."""
    if name == "auto":
        return _core if _core is not None else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled kernels are not available; rebuild the extension")
        return _core
    raise ValueError(f"unknown backend {name!r}")


kernels = get_kernels(os.environ.get("OHFS_BACKEND", "auto"))


def active_backend():
    return kernels.BACKEND_NAME
