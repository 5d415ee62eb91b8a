"""Robin-wall Prandtl boundary-layer toolkit."""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    Field,
    FieldKind,
    GridSpec,
    MarginReport,
    MonotonicityError,
    NumericalError,
    ShearProfile,
    ShiftSign,
    StructuralError,
    canonical_shear,
    check_monotonicity,
    d_t,
    d_x,
    d_y,
    experiment_tags,
    index_set,
    kernel_shear,
    norm_A,
    norm_boundary_A,
    smooth_S,
    smooth_Su,
    smooth_Sv,
)


def run_experiment(experiment, config=None, out_dir="out"):
    """Run one experiment and return its manifest as a dict.

    `config` may be a dict, a path to a JSON file, or None for the defaults.
    """
    if config is None:
        text = "{}"
    elif isinstance(config, dict):
        text = json.dumps(config)
    else:
        with open(os.fspath(config)) as fh:
            text = fh.read()
    return json.loads(_core._run_experiment(text, experiment, os.fspath(out_dir)))

