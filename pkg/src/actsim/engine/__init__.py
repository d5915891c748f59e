"""Compiled activity-driven simulation."""

from .program import Block, PlanError, SimProgram, compile_program
from .runner import ExpectFailure, RunResult, ScriptError, parse_script, run_script
from .sim import Engine, MetricCounters, SimState, report_metrics

__all__ = ["Block", "Engine", "ExpectFailure", "MetricCounters", "PlanError", "RunResult",
           "ScriptError", "SimProgram", "SimState", "compile_program", "parse_script",
           "report_metrics", "run_script"]
