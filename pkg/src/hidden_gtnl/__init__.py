"""Hidden genuine tripartite nonlocality in a sequential entanglement-swapping network.

Submodules: ``qlin`` (density-matrix algebra), ``states`` (state families),
``measure`` (observables and correlators), ``protocol`` (swapping stage and
local filters), ``bellineq`` (facet inequalities and closed forms),
``entangle`` (genuine multipartite concurrence), ``optimize`` (facet
maximization) and ``scan`` (classification and sweeps).
"""
from .bellineq import FacetInequality, closed_form_B, load_facets, ns3_facet, svetlichny_facet
from .entangle import cgm_family, cgm_pure, cgm_xstate
from .errors import (BracketError, DegenerateOutcome, DuplicateId, GtnlError, MissingMonomial,
                     NotXState, NullOutcome, ParseError, ValidationError)
from .measure import BellOutcome, MeasurementSetting, Monomial, correlators
from .optimize import OptimizerConfig, OptResult, maximize_facet, maximize_facet_filtered
from .protocol import FilterParams, apply_filters, smp_prepare
from .qlin import DensityMatrix, partial_trace, trace_distance
from .scan import RevelationReport, ScanSpec, Verdict, classify_point, run_scan
from .states import Family, StateFamilyParams, XStateParams, extract_x_params, make_family

__version__ = "0.1.0"
