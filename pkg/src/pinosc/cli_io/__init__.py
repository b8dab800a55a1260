"""Configuration, data files, the sweep harness and the command-line interface."""
from .config import (IVConfig, ProtocolConfig, RunConfig, SweepSpec, default_config_text,
                     load_config, parse_config, serialize_config)
from .files import (SCHEMA_VERSION, CSVFormatError, format_traces_csv, parse_traces_csv,
                    read_json, read_matrix_csv, read_traces_csv, write_json, write_matrix_csv,
                    write_phase_map, write_traces_csv)
from .pipeline import PointResult, SweepResult, run_cells, simulate_point, sweep

__all__ = [
    "IVConfig", "ProtocolConfig", "RunConfig", "SweepSpec", "default_config_text", "load_config",
    "parse_config", "serialize_config", "SCHEMA_VERSION", "CSVFormatError", "format_traces_csv",
    "parse_traces_csv", "read_json", "read_matrix_csv", "read_traces_csv", "write_json",
    "write_matrix_csv", "write_phase_map", "write_traces_csv", "PointResult", "SweepResult",
    "run_cells", "simulate_point", "sweep",
]
