"""Configuration, data ingestion, experiment orchestration and reports."""

from .catalog import CASE_PRESETS, Catalog, build_instance, load_catalog
from .config import ConfigError, RunConfig, load_config
from .yeardata import YEAR_HEADER, DataError, ingest_year, synth_year, write_year

__all__ = [
    "CASE_PRESETS", "Catalog", "ConfigError", "DataError", "RunConfig", "YEAR_HEADER",
    "build_instance", "ingest_year", "load_catalog", "load_config", "synth_year", "write_year",
]
