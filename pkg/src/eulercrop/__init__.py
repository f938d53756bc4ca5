"""eulercrop: cropped Euler products of weight-2 modular L-functions.

Partitions primes by residue degree in the splitting field of the attached
abelian variety, evaluates the cropped products and their order at s = 1,
and runs the equidistribution and convergence diagnostics.
"""

__version__ = "0.1.0"

from .arith import (  # noqa: F401
    DirichletCharacter,
    PrimeTable,
    RootOfUnity,
    UnitGroup,
    multiplicative_order,
    quadratic_character,
    sieve_primes,
    trivial_character,
)
