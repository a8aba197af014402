"""Explanations for continuous-time dynamic graph models by subset search."""

from ._core import (
    ALPHA_FIDELITY_CAP,
    ALPHA_FIDELITY_FLOOR,
    BridgeOracle,
    CallbackOracle,
    ComputationGraph,
    DataError,
    Error,
    EventStore,
    ExplainResult,
    Explanation,
    FidelityReport,
    InvalidArgument,
    ModelOracle,
    ObjectiveWeights,
    OracleError,
    PlantedModel,
    PlantedOracle,
    SearchConfig,
    SyntheticInstance,
    TaskKind,
    TaskSpec,
    accept_probability,
    alpha_fidelity,
    delta_fidelity,
    evaluate,
    explain,
    extract_computation_graph,
    fidelity_minus,
    fidelity_plus,
    generate,
    load_events,
    objective,
    prediction_distance,
    read_ground_truth,
    recovery_score,
    run_cli,
    sparsity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
