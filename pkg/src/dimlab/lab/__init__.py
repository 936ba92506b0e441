"""Experiment harness: configs, checkers, reports and the command line."""
from .checks import CHECKERS, CheckReport, Quantity, Row, Verdict, judge, run_check
from .config import CHECK_IDS, ConfigError, ExperimentConfig, load_config

__all__ = ["CHECKERS", "CHECK_IDS", "CheckReport", "ConfigError", "ExperimentConfig", "Quantity", "Row",
           "Verdict", "judge", "load_config", "run_check"]
