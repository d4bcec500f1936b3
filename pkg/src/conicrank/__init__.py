"""Exact GF(2) ranks and code dimensions of conic incidence structures in PG(2, q)."""

from .gf import Field, FieldElement, FieldError, field_for_order, make_field
from .gf2mat import BACKEND, Gf2Matrix
from .incidence import DimensionReport, LabeledMatrix, build_matrix, dimension_report
from .plane import ConicGeometry, LineClass, PointClass, build_geometry
from .verify import LemmaVerdict, run_suite

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConicGeometry", "DimensionReport", "Field", "FieldElement", "FieldError",
    "Gf2Matrix", "LabeledMatrix", "LemmaVerdict", "LineClass", "PointClass", "build_geometry",
    "build_matrix", "dimension_report", "field_for_order", "make_field", "run_suite",
]
