"""Phase-field chemotaxis solver and sharp-interface reference flows."""

from ._core import (
    PotentialParams,
    __version__,
    front_track,
    g,
    g_star,
    g_star_prime,
    integrate_circles,
    main,
    oracle,
    rho_of_phi,
    run,
    simulate,
    sweep,
    diagnose,
    wbar,
)

__all__ = [
    "PotentialParams",
    "__version__",
    "diagnose",
    "front_track",
    "g",
    "g_star",
    "g_star_prime",
    "integrate_circles",
    "main",
    "oracle",
    "rho_of_phi",
    "run",
    "simulate",
    "sweep",
    "wbar",
]
