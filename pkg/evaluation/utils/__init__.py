from .metrics_utils import (
    MetricsCalculator,
    confusion,
    f_measure_sequence,
    evaluate_masks,
    write_report,
    CSV_COLUMNS,
)

__all__ = [
    'MetricsCalculator',
    'confusion',
    'f_measure_sequence',
    'evaluate_masks',
    'write_report',
    'CSV_COLUMNS',
]
