"""Kernel backend selection.

The compiled extension is optional; when it is absent (no compiler at
install time) the NumPy twins take over with identical semantics.
``BACKEND`` names the active implementation and is recorded in CLI
provenance headers.
"""

try:
    from ergosum import _ext as _impl

    BACKEND = "compiled"
except ImportError:  # pragma: no cover - depends on build environment
    from ergosum import _pykernels as _impl

    BACKEND = "python"

renewal_convolve = _impl.renewal_convolve
translate_count = _impl.translate_count
