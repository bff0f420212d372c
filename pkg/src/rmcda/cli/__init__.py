from .io import load_matrix, write_matrix
from .pipeline import PipelineConfig, run_pipeline

__all__ = ["load_matrix", "write_matrix", "PipelineConfig", "run_pipeline"]
