"""Piecewise linear maps with Pisot slopes: exact orbits, F_E point sets,
invariant densities and coupling with the beta transformation."""

from .numberfield import (Classification, FieldElement, NumberField, classify, conjugate_bound,
                          fe_floor, fe_frac, fe_sign, make_field)
from .maps import (Branch, PLMap, AffineForm, affine_form, apply, apply_one_sided, beta_map,
                   build_map, digit_alpha, flip_radix_map, flipped_beta_counterexample,
                   handelman_map, handelman_search, kn_pair, st_map, tent_map)
from .orbits import (ExactOrbit, NumericOrbit, PeriodicityCertificate, detect_eventual_period,
                     iterate_exact, iterate_numeric, occupation_histogram)
from .discreteness import (DigitSet, WindowEnumeration, enumerate_window, gap_bound,
                           separation_bound, verify_min_gap)
from .density import (DigitMachinery, ParryDensity, StDensityProfile, bounds_check, e_terms,
                      eval_density, normalize_check, parry_density, st_profile, transfer_residual)
from .equivalence import (CouplingReport, GenericReport, IntervalUnion, birkhoff_frequency,
                          coupling_forward, coupling_reverse, generic_report,
                          membership_implication_check, star_discrepancy, tilde_set)

__version__ = "0.1.0"
