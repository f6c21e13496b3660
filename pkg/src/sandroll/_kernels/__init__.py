"""Backend selection for the hot loops.

The compiled backend is used when numba imports cleanly, unless the
environment sets ``SANDROLL_NUMBA=0``. numba is imported lazily, on the first
kernel call, so light commands never pay for it.
"""

import os

from . import numpy_impl
from .numpy_impl import (BACKWARD, ERR_OK, ERR_SINKAGE, FORWARD, NONE, STOP_COURSE,
                         STOP_MAX_STRIDES, STOP_STUCK)

_backend = None


def _wanted() -> str:
    return "numpy" if os.environ.get("SANDROLL_NUMBA", "1").strip() in ("0", "false", "no") else "numba"


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` ("numba" or "numpy").

    Without a name, the environment decides and the choice is cached.
    """
    global _backend
    if name is None:
        if _backend is None:
            _backend = _load(_wanted())
        return _backend
    return _load(name)


def _load(name: str):
    if name == "numpy":
        return numpy_impl
    if name != "numba":
        raise ValueError(f"unknown kernel backend {name!r}")
    try:
        from . import numba_impl
    except ImportError:
        return numpy_impl
    return numba_impl


def backend_name(module=None) -> str:
    module = module or get_backend()
    return "numpy" if module is numpy_impl else "numba"


def closed_form_sweep(*args):
    return get_backend().closed_form_sweep(*args)


def batch_roll(*args):
    return get_backend().batch_roll(*args)


def run_strides(*args):
    return get_backend().run_strides(*args)
