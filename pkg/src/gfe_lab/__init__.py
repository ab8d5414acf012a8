"""Workbench for general functional equations.

An equation of type (k, m, n, p) relates k unknown functions through m
inner operations on the left and n on the right, each taking p arguments:
``F(f(alpha_1(x)), ..., f(alpha_m(x)), x) = G(f(beta_1(x)), ..., f(beta_n(x)), x)``.

Submodules:

* :mod:`gfe_lab.core`: equations, systems, residuals and satisfaction
* :mod:`gfe_lab.regularity`: continuity scales, precontinuity, bounding relations
* :mod:`gfe_lab.zoo`: ready-made equations and exact solutions
* :mod:`gfe_lab.harness`: perturb-then-fit stability experiments
* :mod:`gfe_lab.extension`: exact extension search on finite carriers
* :mod:`gfe_lab.dsl`: the ``.gfe`` text language
* :mod:`gfe_lab.cli`: the ``gfe-lab`` command
"""
from .core import (
    FunTuple,
    Gfe,
    GfeSystem,
    MatrixMapping,
    NamedOp,
    OpFamily,
    SampleSet,
    Verdict,
    Witness,
    is_v_solution,
    max_residual,
    residual,
    satisfies,
)
from .errors import GfeError
from .spaces import SpaceDesc

__version__ = "0.1.0"

__all__ = [
    "FunTuple", "Gfe", "GfeError", "GfeSystem", "MatrixMapping", "NamedOp", "OpFamily",
    "SampleSet", "SpaceDesc", "Verdict", "Witness", "is_v_solution", "max_residual",
    "residual", "satisfies",
]
