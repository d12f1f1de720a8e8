"""Approximation algorithms and exact references for the metric s-t-path TSP."""

from .dp import lambda_schedule, run_dp
from .instance import MetricInstance, TourResult, gen_random, load_instance, metric_closure, parse_instance, validate_metric
from .invariants import verify_instance
from .lp import DpCall
from .oracle import held_karp_path
from .parity import christofides_hoogeveen, run_rdp, solve_rdp

__all__ = [
    "MetricInstance",
    "TourResult",
    "DpCall",
    "gen_random",
    "load_instance",
    "metric_closure",
    "parse_instance",
    "validate_metric",
    "lambda_schedule",
    "run_dp",
    "run_rdp",
    "solve_rdp",
    "christofides_hoogeveen",
    "held_karp_path",
    "verify_instance",
]

__version__ = "0.1.0"
