"""qpdm: a deterministic desk-scale simulator of a two-party quantum
privacy-preserving association-rule mining protocol on vertically
partitioned boolean databases, with exact classical ground truth and the
commutative-encryption baseline it is measured against."""

from .classical import (
    BitLog,
    ClassicalKey,
    classical_support,
    commutative_pow,
    exhaustive_key_attack,
)
from .counting import (
    ConfidenceEstimate,
    CountingConfig,
    SupportEstimate,
    counting_distribution,
    default_counting_width,
    estimate_confidence,
    joint_support,
    quantum_count,
)
from .dataset import (
    ItemSet,
    ParseError,
    PartitionedView,
    TransactionDatabase,
    exact_confidence,
    exact_support,
    membership_flag,
    pad_to_power_of_two,
    parse_database,
    vertical_partition,
)
from .miner import (
    AssociationRule,
    MiningReport,
    apriori_frequent,
    exact_estimator,
    exact_mine,
    generate_rules,
    quantum_estimator,
    run_mining,
)
from .protocol import (
    EncryptionKey,
    PartyState,
    Transcript,
    build_qram,
    controlled_grover,
    make_key,
    reference_phase_oracle,
    run_oracle_u,
    sample_key,
    transcript_total,
)
from .qsim import MeasurementOutcome, RegisterLayout, SparseState

__version__ = "0.1.0"
