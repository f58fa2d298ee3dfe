"""Operator quantum error correction for finite-dimensional channels."""

from .algebra import (
    Block,
    BlockStructure,
    OperatorSpace,
    center,
    commutant,
    commutant_of,
    decompose_structure,
    gamma_map,
    generate_algebra,
)
from .channel import (
    ChannelReport,
    QuantumChannel,
    apply,
    apply_dual,
    choi,
    compose,
    identity_channel,
    kraus_from_choi,
    superoperator,
    unitary_channel,
    validate,
)
from .correction import (
    KLReport,
    OQECReport,
    RecoveryChannel,
    a0_deviation,
    correctable_triple_deviation,
    kl_check,
    oqec_check,
    reduce_to_standard,
    synthesize_oqec_recovery,
    synthesize_standard_recovery,
    verify_correctable_triple,
    verify_standard_triple,
)
from .errors import *  # noqa: F401,F403
from .matkit import DEFAULT_TOL, Tolerance
from .noiseless import (
    NSReport,
    SubsystemDecomposition,
    discover_ns_unital,
    extract_tau,
    find_ns_unital,
    fixed_points,
    interaction_algebra,
    verify_ns,
    verify_ns_semantic,
)
from .uns import UNSReport, inverse_conjugation, uns_algebra, verify_uns

__version__ = "0.1.0"
