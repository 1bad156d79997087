"""Sub-Riemannian geodesics on SH(2).

Closed-form exponential map, cut and conjugate times, the stratified cut locus
in the plane z = 0, the inverse exponential map with all minimizers, and
samplers for spheres, wavefronts and the caustic.
"""
from .errors import (
    DivergenceError,
    DomainError,
    NumericFailure,
    OriginExcludedError,
    UnsupportedStratumError,
)
from .expmap import ORIGIN, GeodesicSpec, GroupPoint, exp, exp_mid, exp_spec, ode_oracle, r1r2
from .kernels import BACKEND
from .optimality import (
    bounds,
    conj_time_numeric,
    cut_time,
    in_d1,
    in_d2,
    jacobian_det,
    p11_root,
    t1_conj_bounds,
    t1_max,
    tt,
    tt_of_energy,
)
from .pendulum import Covector, EllipticCoords, Stratum, StratumTag, classify, energy
from .plane import PlaneLabel, classify_plane, gamma_curves, invert_curve_k, quadrant_reduce
from .sampling import (
    MeshOutput,
    SampleGrid,
    caustic_cusps,
    export,
    sample_caustic,
    sample_cutlocus,
    sample_sphere,
    sample_wavefront,
)
from .symmetry import reflect_c, reflect_m, reflect_n
from .synthesis import (
    SolverConfig,
    SynthesisResult,
    distance,
    minimizers,
    solve_interior,
    solve_plane,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Covector", "DivergenceError", "DomainError", "EllipticCoords", "GeodesicSpec",
    "GroupPoint", "MeshOutput", "NumericFailure", "ORIGIN", "OriginExcludedError", "PlaneLabel",
    "SampleGrid", "SolverConfig", "Stratum", "StratumTag", "SynthesisResult",
    "UnsupportedStratumError", "bounds", "caustic_cusps", "classify", "classify_plane",
    "conj_time_numeric", "cut_time", "distance", "energy", "exp", "exp_mid", "exp_spec", "export",
    "gamma_curves", "in_d1", "in_d2", "invert_curve_k", "jacobian_det", "minimizers",
    "ode_oracle", "p11_root", "quadrant_reduce", "r1r2", "reflect_c", "reflect_m", "reflect_n",
    "sample_caustic", "sample_cutlocus", "sample_sphere", "sample_wavefront", "solve_interior",
    "solve_plane", "t1_conj_bounds", "t1_max", "tt", "tt_of_energy",
]
