"""Sliding-window multivariate time series forest for SEP event classification."""

from slimtsf._core import (  # noqa: F401
    ChannelId,
    ContingencyTable,
    EventCategory,
    EventRecord,
    ExtractionConfig,
    FeatureDataset,
    Forest,
    ForestHyperparams,
    LabeledInstance,
    Scenario,
    ScaleSpec,
    SlimTsfError,
    SyntheticSpec,
    TimeSeriesSlice,
    WindowSpec,
    apply_scenario,
    bootstrap_importances,
    contingency,
    css,
    cut_window,
    extract_dataset,
    fit_forest,
    forest_from_json,
    generate_events,
    generate_intervals,
    gini,
    gss,
    hss,
    interval_mean,
    interval_slope,
    interval_std,
    log_transform,
    parse_manifest,
    parse_slice_csv,
    pool_consecutive,
    run_explain_channel_shares,
    run_grid_json,
    skill_report,
    stratified_split,
    tss,
    write_synthetic_dataset,
)

__version__ = "0.1.0"
