"""Backend selection for the hot IPF loop.

The compiled Cython kernel is used when it was built; otherwise the numpy
implementation is loaded.  Setting ``CATINFO_PURE_PYTHON=1`` forces the
fallback.
"""

import os

BACKEND = "python"

if os.environ.get("CATINFO_PURE_PYTHON", "") not in ("", "0"):
    from ._ipf_py import ipf_loop
else:
    try:
        from ._ipf_kernel import ipf_loop

        BACKEND = "cython"
    except ImportError:
        from ._ipf_py import ipf_loop

from . import _ipf_py

python_ipf_loop = _ipf_py.ipf_loop

__all__ = ["BACKEND", "ipf_loop", "python_ipf_loop"]
