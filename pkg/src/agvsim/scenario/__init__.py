from .metrics import Metrics, compute_metrics, format_table
from .model import BUNDLED, Obstacle, Scenario, load_scenario, parse_scenario
from .path import Path, Projection
from .simulate import (COLLISION, COLUMNS, LINE_CROSS, TRACK_LOST, EventDetector,
                       TrajectoryRecord, run_simulation)

__all__ = [
    "BUNDLED", "COLLISION", "COLUMNS", "EventDetector", "LINE_CROSS", "Metrics",
    "Obstacle", "Path", "Projection", "Scenario", "TRACK_LOST", "TrajectoryRecord",
    "compute_metrics", "format_table", "load_scenario", "parse_scenario",
    "run_simulation",
]
