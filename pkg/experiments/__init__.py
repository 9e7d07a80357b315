from .runner import (
    LP_THRESHOLD,
    SandwichReport,
    SweepRecord,
    SweepRunner,
    reference_lines,
    run_sweep,
    sandwich_check,
    slope_gaps,
)

__all__ = [
    'LP_THRESHOLD', 'SandwichReport', 'SweepRecord', 'SweepRunner',
    'reference_lines', 'run_sweep', 'sandwich_check', 'slope_gaps',
]
