from .backends import HFClipBackend, ModelLoadError
from .export import ExportJob, ExportReport, export
from .fmes import write_fmes

__all__ = ["ExportJob", "ExportReport", "HFClipBackend", "ModelLoadError",
           "export", "write_fmes"]
