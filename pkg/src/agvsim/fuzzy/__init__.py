from .config import default_controller, load_rulebase, parse_rule, parse_rulebase
from .inference import (Diagnostic, FuzzyController, InferenceResult, Mirror, Rule,
                        infer, mirror_rule, rule_strengths, validate_rulebase)
from .sets import LinguisticVariable, MembershipFunction, membership_grade

__all__ = [
    "Diagnostic", "FuzzyController", "InferenceResult", "LinguisticVariable",
    "MembershipFunction", "Mirror", "Rule", "default_controller", "infer",
    "load_rulebase", "membership_grade", "mirror_rule", "parse_rule",
    "parse_rulebase", "rule_strengths", "validate_rulebase",
]
