"""Regularize noisy building-footprint polygons traced from rasters."""

from .despike import Criterion, SpikeConfig, SpikeVerdict, diagnose_vertex, remove_spikes
from .errors import FootregError, IoError, ParseError, UnsupportedGeometry
from .fitline import FitResult, OlsResult, ols_fit, penalty_profile, tls_fit
from .geometry import Line, Orientation, Point, Polyline, Ring, Turn
from .io import FeatureRecord, Format, export_corpus, read_features, write_features
from .pipeline import (
    CornerMode,
    PipelineConfig,
    RegularizationReport,
    RegularizedRing,
    fit_runs,
    rebuild_ring,
    regularize,
    segment_runs,
)
from .simplify import SegmentRun, SimplifyConfig, douglas_peucker, simplify_ring
from .svg import render_svg
from .synth import SynthSpec, make_case, make_corpus

__version__ = "0.1.0"
