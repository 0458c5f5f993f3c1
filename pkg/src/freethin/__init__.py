"""Free Poisson thinning: exact non-crossing combinatorics, free cumulants,
thinning verifiers, pivot-polynomial roots, random-matrix and classical checks."""

__version__ = "0.1.0"

from .cumulants import CumulantSpec, MomentSeq, cumulants_to_moments, free_cumulant, moments_to_cumulants, product_cumulant
from .errors import FreeThinError, NumericalError, PreconditionError, ResourceBoundError, SingularPivotError
from .nc_lattice import NonCrossingPartition, enumerate_nc, join, kreweras, lattice, meet, moebius

__all__ = [
    "CumulantSpec",
    "MomentSeq",
    "NonCrossingPartition",
    "FreeThinError",
    "NumericalError",
    "PreconditionError",
    "ResourceBoundError",
    "SingularPivotError",
    "cumulants_to_moments",
    "enumerate_nc",
    "free_cumulant",
    "join",
    "kreweras",
    "lattice",
    "meet",
    "moebius",
    "moments_to_cumulants",
    "product_cumulant",
]
