"""Coordinates of points under unimodal maps: preimage lattices of 0, the
decomposition, digit and invariant codings, and explicit conjugacies."""
from __future__ import annotations

from .codings import (DigitSequence, GDecomposition, InvariantCoordinates,
                      decomposition_from_digits, decomposition_from_mt, digit_sequence,
                      digits_from_decomposition, epsilon, g_decomposition, invariant_coordinates,
                      lex_compare, mt_from_decomposition, rot, rot_index)
from .conjugacy import (ConvergenceError, ConvergenceReport, conjugate, conjugate_grid,
                        conjugate_report, decode, skew_decode, skew_endpoint_series,
                        skew_endpoint_series_from_decomposition, skew_interval_length)
from .lattice import (DepthError, LocalizationPath, LocalizedInterval, MidpointError,
                      PreimageLevel, follow_bits, index_window, localize, preimage_level,
                      refine_midpoint)
from .maps import (DomainError, MapError, UnimodalMap, evaluate, invert_branch, iterate,
                   logistic_map, make_map, orbit, piecewise_linear_map, skew_tent_map,
                   tent_map, validate)

__version__ = "0.1.0"
