"""Backend selection for the heralded click-statistics kernels.

The compiled extension is used when it was built; otherwise, or when
``BELLDICE_PURE_PYTHON`` is set to a non-empty value, the pure-Python
module is loaded.  ``BACKEND`` names the active implementation.
"""

import os

if os.environ.get("BELLDICE_PURE_PYTHON"):
    from ._kernel_py import chsh_sum, correlator, heralded_noclick

    BACKEND = "python"
else:
    try:
        from ._kernel import chsh_sum, correlator, heralded_noclick

        BACKEND = "cython"
    except ImportError:
        from ._kernel_py import chsh_sum, correlator, heralded_noclick

        BACKEND = "python"

__all__ = ["BACKEND", "chsh_sum", "correlator", "heralded_noclick"]
