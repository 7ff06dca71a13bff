"""Manifest-driven sweeps with a content-addressed spectrum cache."""
from kickedising.runner.figures import emit_figure_data
from kickedising.runner.jobs import ResultRecord, RunSummary, expand_jobs, load_records, run_manifest
from kickedising.runner.manifest import NoiseGrid, RunManifest, load_manifest, parse_manifest

__all__ = [
    "NoiseGrid",
    "ResultRecord",
    "RunManifest",
    "RunSummary",
    "emit_figure_data",
    "expand_jobs",
    "load_manifest",
    "load_records",
    "parse_manifest",
    "run_manifest",
]
