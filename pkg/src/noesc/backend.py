"""Kernel backend selection.

The hot integration loops exist twice: compiled (Cython, ``noesc._ckernels``)
and pure Python (``noesc._pykernels``). The compiled module is used when it
imported successfully; ``NOESC_BACKEND=pure|compiled`` or :func:`use` force a
choice. Both expose the same functions and produce the same numbers.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built on this install
    _ckernels = None


def _select(name):
    if name == "pure":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise RuntimeError("compiled kernels are not available; rebuild the extension")
        return _ckernels
    if name == "auto":
        return _ckernels if _ckernels is not None else _pykernels
    raise ValueError(f"unknown backend {name!r} (expected 'auto', 'pure' or 'compiled')")


_active = _select(os.environ.get("NOESC_BACKEND", "auto"))


def use(name):
    """Switch the active backend; returns the name of the previous one."""
    global _active
    previous = _active.BACKEND
    _active = _select(name)
    return previous


def active_name():
    return _active.BACKEND


def compiled_available():
    return _ckernels is not None


def kernels():
    """The active kernel module."""
    return _active
