"""Distributed coherent-absorption photon-number-resolving detectors.

Transfer-matrix optics for meandered nanowire stacks, stack design helpers,
photocounting statistics of on-off detector arrays and a seeded thickness
tolerance study.
"""

from .design import (
    CounterPropagating,
    DesignTargets,
    Salisbury,
    UniformityReport,
    build_distributed,
    build_salisbury,
    deposition_sweep,
    optimal_thickness,
    solve_filling_factor,
    spectrum,
    stack_uniformity,
    target_coefficients,
    thin_film_optimal_thickness,
    uniformity,
)
from .errors import DistPNRError
from .materials import NBTIN, VACUUM, EffectiveMedium, Material, MeanderSpec, effective_permittivity
from .optics import (
    Coherent,
    Layer,
    Mirror,
    Open,
    Stack,
    coherent_response,
    per_layer_absorption,
    power_balance,
    stack_transfer_matrix,
    traveling_response,
)
from .photostats import (
    DetectorArraySpec,
    click_prob_given_fock,
    click_prob_series_fock,
    fock,
    resolution_probability,
    source_click_distribution,
    squeezed_vacuum_pn,
)
from .stackfile import parse_stack_spec, stack_to_dict, write_stack_spec
from .tolerance import PerturbationSpec, perturb_stack, run_ensemble

__version__ = "0.1.0"
