"""Billiards in confocal quadrics: simulation, closure conditions and cross-checks."""

__version__ = "0.1.0"

from .confocal import (
    ConfocalFamily,
    admissibility_polynomial,
    caustic_parameters,
    elliptic_coordinates,
)
from .dynamics import Domain, play_ordered_game, simulate

__all__ = [
    "ConfocalFamily",
    "Domain",
    "admissibility_polynomial",
    "caustic_parameters",
    "elliptic_coordinates",
    "play_ordered_game",
    "simulate",
]
