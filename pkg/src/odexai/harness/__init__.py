"""Dataset ingestion, benchmark execution, aggregation, and report emission."""

from .benchmark import (
    BenchmarkConfig,
    BenchmarkReport,
    GroupAggregate,
    aggregate,
    match_target,
    run_benchmark,
)
from .datasets import DatasetIndex, ImageEntry, load_coco, load_voc
from .report import (
    emit_spider_svg,
    emit_table,
    parse_table_csv,
    report_from_json,
    report_to_json,
    spider_axes,
    write_report_bundle,
)

__all__ = [
    "BenchmarkConfig",
    "BenchmarkReport",
    "DatasetIndex",
    "GroupAggregate",
    "ImageEntry",
    "aggregate",
    "emit_spider_svg",
    "emit_table",
    "load_coco",
    "load_voc",
    "match_target",
    "parse_table_csv",
    "report_from_json",
    "report_to_json",
    "run_benchmark",
    "spider_axes",
    "write_report_bundle",
]
