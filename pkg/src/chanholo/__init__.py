"""Holonomies of discrete sequences and smooth families of quantum channels."""

__version__ = "0.1.0"

from .discrete import ChannelSequence, holonomy, overlap, parallel_gauge, parallel_gauge_holonomy
from .errors import HolonomyError, RankDeficient
from .kraus import KrausRep, choi, gauge_transform, random_channel, zoo
from .matcore import phi, polar_unitary, solve_gauge_equation
from .smooth import ChannelPath, gauge_potential, smooth_holonomy, unitary_family_holonomy
from .uhlmann import channel_from_uhlmann, uhlmann_holonomy

__all__ = [
    "ChannelPath",
    "ChannelSequence",
    "HolonomyError",
    "KrausRep",
    "RankDeficient",
    "channel_from_uhlmann",
    "choi",
    "gauge_potential",
    "gauge_transform",
    "holonomy",
    "overlap",
    "parallel_gauge",
    "parallel_gauge_holonomy",
    "phi",
    "polar_unitary",
    "random_channel",
    "smooth_holonomy",
    "solve_gauge_equation",
    "uhlmann_holonomy",
    "unitary_family_holonomy",
    "zoo",
]
