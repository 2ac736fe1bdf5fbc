"""Ground states of asymptotically cubic Kirchhoff equations on finite weighted graphs."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .builders import grid_dirichlet, lattice_whole, star_dirichlet, triangle_whole
from .errors import (
    GraphFormatError,
    GraphMismatchError,
    InvalidGraphError,
    KgsError,
    NotInConeError,
    ParameterRangeError,
    SpectralError,
    ZeroFunctionError,
)
from .functional import KIND_DIRICHLET, KIND_WHOLE, EnergyFunctional, EnergyParams
from .graphs import (
    Domain,
    GraphFunction,
    WeightedGraph,
    boundary_of,
    domain_from_flags,
    gradient_form,
    gradient_length,
    graph_from_payload,
    integrate,
    laplacian,
    load_graph,
    norm_dirichlet,
    norm_h_sobolev,
    norm_lp,
    norm_sup,
    validate,
)
from .nehari import (
    NehariContext,
    cone_sample,
    fiber_scale,
    in_cone,
    nehari_residual,
    on_manifold,
    project,
    reduced_energy,
)
from .solver import (
    BoundReport,
    SolveOptions,
    SolveResult,
    SolveStatus,
    precheck,
    solve,
    sweep,
    verify,
)
from .spectral import (
    SpectralConstants,
    compute_constants,
    eta0,
    eta0_grid_oracle,
    kappa,
    kappa_whole_explicit,
    lambda1,
    lambda1_whole,
)

__version__ = "0.1.0"
