"""Shared construction cache for the test suite.

Module construction is exact and therefore not free; every test file pulls
its modules through these memoized helpers so each one is built once per
session.
"""

import functools

from qhc import flag, modules, principal
from qhc.rootdata import CartanMatrix, build_root_datum, check_hermitian


@functools.lru_cache(maxsize=None)
def hermitian_pair(kind, rank, l0):
    return check_hermitian(build_root_datum(CartanMatrix.builtin(kind, rank)), l0)


@functools.lru_cache(maxsize=None)
def cached_algebra(kind, rank, l0):
    return flag.SphericalAlgebra(hermitian_pair(kind, rank, l0))


@functools.lru_cache(maxsize=None)
def cached_tower(kind, rank, l0, dirs, levels):
    return flag.ModuleTower(cached_algebra(kind, rank, l0), dirs, levels)


@functools.lru_cache(maxsize=None)
def cached_series(kind, rank, l0, dirs, levels):
    return principal.PrincipalSeriesRep(
        cached_tower(kind, rank, l0, dirs, levels))


@functools.lru_cache(maxsize=None)
def cached_module(kind, rank, l0, hw):
    return modules.simple_module(hermitian_pair(kind, rank, l0), hw)


@functools.lru_cache(maxsize=None)
def cached_isotypic(kind, rank, l0, hw):
    return modules.isotypic_decomposition(cached_module(kind, rank, l0, hw))
