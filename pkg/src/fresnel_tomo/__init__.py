"""Fresnel transforms, truncated Fock-space operators and quantum tomography."""

from .symplectic import (
    NotSymplecticError,
    RayMatrix,
    SRPair,
    abcd_to_sr,
    compose,
    elementary,
    free,
    identity,
    inverse,
    lens,
    rotation,
    scale,
    sr_compose,
    sr_to_abcd,
)
from .gridtransform import Grid, GridWavefunction, apply_fresnel_adjoint, fresnel_transform
from .fockspace import fresnel_operator, tomo_eigenstate, momentum_eigenstate
from .phasespace import (
    TomogramCurve,
    WignerGrid,
    central_identity_check,
    inverse_radon_fbp,
    radon_momentum,
    radon_position,
    tomogram_via_fresnel,
    wigner,
)
from .states import StateSpec, make_state

__version__ = "0.1.0"
