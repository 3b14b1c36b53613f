from ._gazefuse import (
    BalancingError,
    ConfigError,
    ContractError,
    DimensionError,
    Error,
    FormatError,
    FusionModel,
    InputError,
    LowConfidenceError,
    MetricReport,
    UndefinedMetricError,
    __version__,
    aggregate_runs,
    balance_labels,
    bce_with_logits,
    estimate_audio_offset,
    export_timeline,
    read_predictions,
    roc_auc,
    run_cli,
    threshold_metrics,
    toy_backbone_extract,
    write_predictions,
)
