"""Render figure analogues from urllc-sched experiment CSVs."""

from .render import (
    EmptyDataError,
    MalformedCSVError,
    MissingCSVError,
    PlotsError,
    render,
)

__version__ = "0.1.0"

__all__ = [
    "EmptyDataError",
    "MalformedCSVError",
    "MissingCSVError",
    "PlotsError",
    "render",
]
