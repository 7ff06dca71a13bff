"""Quantum kicked top and all-to-all kicked Ising model: block reduction, perturbations and spectral statistics."""
__version__ = "0.1.0"

from kickedising.floquet import EigenphaseSet, FloquetSpec, build_kicked_top, eigenphases  # noqa: E402
from kickedising.spin import SpinBlock, block_multiplicities, build_spin_operator  # noqa: E402

__all__ = [
    "EigenphaseSet",
    "FloquetSpec",
    "SpinBlock",
    "__version__",
    "block_multiplicities",
    "build_kicked_top",
    "build_spin_operator",
    "eigenphases",
]
