from .config_loader import ConfigLoaderError, EngineConfigLoader
from .file_report_repository import FileReportRepository, FileReportRepositoryError
from .trace_file import CsvTraceStore

__all__ = [
    "ConfigLoaderError",
    "CsvTraceStore",
    "EngineConfigLoader",
    "FileReportRepository",
    "FileReportRepositoryError",
]
