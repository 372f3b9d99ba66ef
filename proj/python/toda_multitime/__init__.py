"""Multi-time variational structure of the Toda lattice.

Commuting Hamiltonian flows, Backlund maps, discrete closure and spectrality
invariants, and the zero-curvature matrices, backed by the C++ core.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
