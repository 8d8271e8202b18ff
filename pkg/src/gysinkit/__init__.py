"""Computational toolkit for Novikov-field algebra, torus superpotentials,
quantum-algebra splittings, Gysin chain machinery, and filtered spectral
transfer."""

from .novikov import DEFAULT_TOL, DEFAULT_TRUNCATION, ExponentLattice, LatticeMismatchError, NovikovScalar
from .superpotential import (
    BUILTIN_FAMILIES,
    CritConfig,
    CriticalPointReport,
    CriticalSearchResult,
    LocalSystem,
    SuperpotentialPoly,
    builtin,
    find_critical_points,
)
from .algebra import (
    AlgebraElement,
    CyclicPresentation,
    IdempotentDecomposition,
    NonSemisimpleError,
    TablePresentation,
    multiply,
    presentation_from_json,
    split_binomial,
    split_table,
    verify_decomposition,
)
from .gysin import (
    ConnectingClass,
    LiftedPearlComplex,
    NonCriticalError,
    TorusPearlComplex,
    build_lifted_complex,
    build_torus_complex,
    chain_i,
    chain_map_report,
    chain_p,
    connecting_class,
    verify_gysin_exactness,
)
from .filtered import (
    FilteredComplex,
    Generator,
    NotACycleError,
    SubadditivityError,
    SyntheticTransferRun,
    TransferParams,
    ZeroClassError,
    homogenize,
    lift_chain,
    lift_complex,
    monotone_radius,
    pearl_to_filtered,
    reduction_constant,
    reduction_identity_check,
    synthetic_transfer_run,
    transfer_spectral,
    verify_transfer,
    verify_valuation_axiom,
)

__version__ = "0.1.0"
