"""Helicity bases, gauge potentials, photon position operators and localized-field synthesis.

Set ``PHOTON_GAUGE_KIT_THREADS`` before import to cap the BLAS/OpenMP thread
pools used by numpy and scipy.
"""

import os as _os

__version__ = "0.1.0"

_threads = _os.environ.get("PHOTON_GAUGE_KIT_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
