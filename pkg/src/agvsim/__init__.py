"""Simulation of a camera-guided, fuzzy-controlled line-following vehicle."""

from .camera import CameraModel, back_project, calibrate, default_camera, project
from .errors import (AgvsimError, CoincidentPoints, ConfigError, DegenerateCalibration,
                     InsufficientPoints, RuleBaseError, ScenarioInvalid, SingularViewGeometry)
from .fuzzy import default_controller, infer, load_rulebase
from .scenario import compute_metrics, load_scenario, run_simulation

__version__ = "0.1.0"

__all__ = [
    "AgvsimError", "CameraModel", "CoincidentPoints", "ConfigError", "DegenerateCalibration",
    "InsufficientPoints", "RuleBaseError", "ScenarioInvalid", "SingularViewGeometry",
    "back_project", "calibrate", "compute_metrics", "default_camera", "default_controller",
    "infer", "load_rulebase", "load_scenario", "project", "run_simulation",
]
