"""Discrete Lagrangian and Hamiltonian mechanics on smooth loops, worked out on
the Moufang loop of unit octonions."""

from .algebra import (
    DomainError,
    associator,
    basis,
    oct_conj,
    oct_inner,
    oct_inv,
    oct_mul,
    oct_mul_cd,
    oct_norm,
)
from .loop import (
    INVERTIBLE_OCTONIONS,
    UNIT_OCTONIONS,
    UNIT_QUATERNIONS,
    Loop,
    TangentVector,
    as_unit,
    exp_map,
    log_map,
)
from .mechanics import (
    CotangentPoint,
    ELStepReport,
    Lagrangian,
    el_residual,
    el_solve_step,
    lagrangian_kinetic,
    lagrangian_linear,
    lagrangian_sq,
    legendre_minus,
    legendre_plus,
)
from .numerics import RngSpec, SolverConfig

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "associator",
    "basis",
    "oct_conj",
    "oct_inner",
    "oct_inv",
    "oct_mul",
    "oct_mul_cd",
    "oct_norm",
    "INVERTIBLE_OCTONIONS",
    "UNIT_OCTONIONS",
    "UNIT_QUATERNIONS",
    "Loop",
    "TangentVector",
    "as_unit",
    "exp_map",
    "log_map",
    "CotangentPoint",
    "ELStepReport",
    "Lagrangian",
    "el_residual",
    "el_solve_step",
    "lagrangian_kinetic",
    "lagrangian_linear",
    "lagrangian_sq",
    "legendre_minus",
    "legendre_plus",
    "RngSpec",
    "SolverConfig",
]
