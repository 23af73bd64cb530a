"""End-to-end pipeline for the ``run`` command."""

from src.pathwise.graph.state import PipelineConfig, PipelineState
from src.pathwise.graph.workflow import PipelineWorkflow, create_workflow, run_pipeline

__all__ = [
    "PipelineConfig",
    "PipelineState",
    "PipelineWorkflow",
    "create_workflow",
    "run_pipeline",
]
