"""Degradation modeling toolkit for real-world super-resolution pairs."""


from degflow import version as degflow_version
from degflow.models import DtlrSpec
from degflow.settings import RunConfig

__version__ = degflow_version.__version__

__all__ = ["DtlrSpec", "RunConfig"]
