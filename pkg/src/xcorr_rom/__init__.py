"""Non-intrusive reduced-order models for transport-dominated snapshots.

Snapshots are aligned to a reference by integer circular shifts that maximise
their cross-correlation, a POD basis is built on the aligned matrix, and
radial basis functions map time to the reduced coefficients. Predictions are
shifted back to the physical frame with a regressed time-to-shift map.
"""

from .errors import (DegenerateCorrelationError, FormatError, GridMismatchError, ParameterError,
                     RegressionError, RomError, StageError)
from .pipeline import (ErrorReport, RomModel, default_reference_index, evaluate, offline, predict,
                       predict_reference_frame, rank_sweep)
from .reduction import CoefficientTable, PodBasis, compute_pod, energy_curve, project, reconstruct
from .registration import (RegisteredSet, circular_shift, cross_correlate, optimal_shift,
                           register_set, unregister)
from .regression import RbfModel, ShiftMap, eval_rbf, eval_shift, fit_rbf, fit_shift_map
from .snapshots import (Grid, SnapshotSet, VortexParams, WaveParams, generate_vortex,
                        generate_wave, split)

__version__ = "0.1.0"
