"""Ephemeral-context music recommendation engine and replay harness."""

from .context_builder import (
    ContextVocabulary,
    EphemeralContext,
    build_context,
    context_cardinality,
    context_id,
    render_sentence,
)
from .feature_inference import (
    Evidence,
    FeatureEstimate,
    FeatureKind,
    Status,
    UserProfile,
    classify_relative_speed,
    classify_time_of_day,
    extract_evidence,
    fuse_evidence,
    infer_features,
)
from .recommenders import (
    Catalog,
    HybridWeights,
    MetricsReport,
    RecommendationList,
    RecommenderSpec,
    Track,
    active_recommenders,
    blend_hybrid,
    default_specs,
    default_weights_from_survey,
    score_individual,
    session_metrics,
)
from .sensor_model import (
    FaultPlan,
    Scenario,
    SensorReading,
    SourceDescriptor,
    apply_fault_plan,
    parse_scenario,
    serialize_scenario,
    window_readings,
)
from .simulator import SessionTrace, dropout_sweep, emit_report, replay

__version__ = "0.1.0"
