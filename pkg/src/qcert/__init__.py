"""Three-stage quantum cryptography with entangled certificates, plus attack simulations."""

from qcert.adversary import (
    AttackOutcome,
    EveStrategy,
    StrategyKind,
    run_intercept_resend,
    run_mitm_certified,
    run_mitm_plain,
)
from qcert.authority import (
    AuthResult,
    Certificate,
    MasterKey,
    PairBatchView,
    PlacementMode,
    assemble_stream,
    collapse_certificate,
    extract_stream,
    gen_master_key,
    issue_batch,
    placement_positions,
    verify,
)
from qcert.errors import AlreadyCollapsed, ConfigError, InvalidArgument
from qcert.harness import (
    AggregateStats,
    Scenario,
    ScenarioConfig,
    TrialResult,
    derive_trial_seed,
    run_trials,
)
from qcert.qsim import (
    BellType,
    EntangledPair,
    Side,
    StateVec1,
    StateVec2,
    Unitary2,
    adjoint,
    apply1,
    bell_state,
    measure1,
    measure_half,
    rotation,
)
from qcert.rng import RandomSource
from qcert.three_stage import (
    PartySecret,
    SessionTranscript,
    TapPoint,
    Transmission,
    encode_bit,
    run_certified_session,
    run_session,
)

__version__ = "0.1.0"
