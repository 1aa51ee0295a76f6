"""Dissemination subgraphs of random networks: generation, simulation and analytics."""

from .analytics import Prediction, predict
from .degrees import DegreeModel, poisson, power_law
from .flooding import disseminate, measure
from .generators import GenSpec, generate
from .graph import Graph, components
from .harness import ExperimentPlan, emit_csv, run_experiment
from .heuristics import build_subgraph, local_update, make_choices
from .plot import emit_plot

__version__ = "0.1.0"
