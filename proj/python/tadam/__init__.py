"""Adam and student-t robust Adam (TAdam) optimizers with their experiment harness."""

from ._tadam import (
    Algorithm,
    BoundInputs,
    BoundTerms,
    ConfigError,
    Dataset,
    GroupState,
    InputError,
    LossKind,
    MlpModel,
    MomentCheckReport,
    NoiseSpec,
    OnlineProblem,
    OptimizerConfig,
    RegretTrace,
    StepDiagnostics,
    __version__,
    adam_step,
    config_hash,
    effective_decay,
    eval_bound_rhs,
    init_model,
    make_dataset,
    make_group_state,
    mc_theorem2,
    parse_config,
    run_experiment,
    run_regret_experiment,
    sgd_step,
    tadam_step,
)

REGRESSION_SHAPE = (1, 50, 50, 50, 50, 1)
