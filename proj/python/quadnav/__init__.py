"""quadnav: waypoint-navigation RL with action-error statistics and HJ reachability.

Thin Python surface over the C++ core; see `quadnav._core` for everything exported.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
