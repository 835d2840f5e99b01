"""Central triangulation under parallel edge flips.

Exact SAT-based solving for small and medium instances, flip heuristics for
large ones, plus a validator, brute-force oracles, file I/O and a CLI.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as KERNEL_BACKEND  # noqa: F401
