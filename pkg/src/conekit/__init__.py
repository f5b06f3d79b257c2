"""conekit: descent-cone geometry of nuclear-norm recovery, executable.

Sparse tight frames and their coherences, rank-one measurement operators,
adversarial noise certificates that pin the minimum conic singular value
from above, a primal-dual solver for the constrained nuclear-norm program,
Monte Carlo verifiers for the supporting concentration lemmas, and a
seeded experiment harness.
"""

__version__ = "0.1.0"

from .errors import (
    AdmissibilityError,
    ArgumentError,
    CertificateIntegrityError,
    ConekitError,
    ConfigError,
    DegenerateInputError,
    DimensionError,
    FrameIntegrityError,
    NumericError,
)

__all__ = [
    "__version__",
    "AdmissibilityError",
    "ArgumentError",
    "CertificateIntegrityError",
    "ConekitError",
    "ConfigError",
    "DegenerateInputError",
    "DimensionError",
    "FrameIntegrityError",
    "NumericError",
]
