"""qsf: Monte Carlo qubit dynamics simulator and dataset factory."""

from .datasetio import (
    DatasetConfig,
    ExampleRecord,
    dataset_name,
    enumerate_standard,
    parse_name,
    read_example,
    write_example,
)
from .pipeline import example_seed, generate_example
from .validate import validate_archive

__version__ = "0.1.0"

__all__ = [
    "DatasetConfig",
    "ExampleRecord",
    "dataset_name",
    "enumerate_standard",
    "example_seed",
    "generate_example",
    "parse_name",
    "read_example",
    "validate_archive",
    "write_example",
    "__version__",
]
