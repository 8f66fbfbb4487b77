"""Singular-layer physics-informed networks for 2D convection-diffusion.

Small two-layer sigmoid networks are wrapped in boundary-exact ansatze that
carry closed-form boundary-layer correctors, trained by collocation, and
checked against exact solutions, corrector oracles and a Shishkin-mesh
finite-difference solver.
"""
from .jet import Jet2, jet_seed_x, jet_seed_y, lift, sigmoid_chain
from .network import (NetworkParams, load_params, net_eval_direct, net_eval_jet, net_init,
                      save_params)
from .problems import PRESETS, Expression, ExperimentPreset, Problem, make_problem, preset, residual
from .models import SlPinnModel, make_model, model_residual, predict
from .training import (CollocationGrid, CompiledLoss, TrainConfig, TrainingDiverged, TrainingTrace,
                       grad_loss, loss, train)
from .correctors import (LimitSolution, PblTable, corner_characteristic, corner_noncharacteristic,
                         limit_characteristic, obl_bottom, obl_left, pbl_reference)
from .evaluation import (ErrorReport, FdSolution, asym_error_exp1, exact_exp3, norms,
                         solve_reference_fd, surface_dump)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "Jet2", "lift", "jet_seed_x", "jet_seed_y", "sigmoid_chain",
    "NetworkParams", "net_init", "net_eval_jet", "net_eval_direct", "save_params", "load_params",
    "Expression", "Problem", "ExperimentPreset", "PRESETS", "make_problem", "preset", "residual",
    "SlPinnModel", "make_model", "predict", "model_residual",
    "CollocationGrid", "TrainConfig", "TrainingTrace", "TrainingDiverged", "CompiledLoss",
    "loss", "grad_loss", "train",
    "LimitSolution", "obl_bottom", "obl_left", "corner_noncharacteristic", "limit_characteristic",
    "pbl_reference", "PblTable", "corner_characteristic",
    "ErrorReport", "FdSolution", "exact_exp3", "asym_error_exp1", "norms", "solve_reference_fd",
    "surface_dump",
    "BACKEND",
]
