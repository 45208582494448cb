"""
urlab - numerical laboratory for elliptic measure on rough boundaries

Samples Ahlfors-regular boundaries of any dimension, builds the regularized
distance D_beta and the degenerate operator -div(D^(d+1-n) A grad), and
measures the Carleson functionals that separate uniformly rectifiable
boundaries from purely unrectifiable ones.
"""

__version__ = "0.1.0"
__author__ = "urlab Team"

from .cli import main as cli_main
from .cli import run_experiment
from .config_manager import ConfigManager
from .models import ExperimentConfig

__all__ = ["ConfigManager", "ExperimentConfig", "cli_main", "run_experiment"]
