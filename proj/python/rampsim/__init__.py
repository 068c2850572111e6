"""Simulation testbed for FFF printer control signals: g-code to step/dir
pulse timelines, trojan transformations, telemetry capture and golden-model
detection."""

from rampsim._core import (  # noqa: F401
    DetectionReport,
    Mismatch,
    PrinterProfile,
    Program,
    RunResult,
    Transaction,
    __version__,
    compare,
    decode_transaction,
    encode_transaction,
    load_profile,
    load_program,
    parse_program,
    read_capture_csv,
    reduce_extrusion,
    relocate,
    run_print,
    serialize,
    standard_suite,
    total_extrusion_mm,
    write_capture_csv,
)
