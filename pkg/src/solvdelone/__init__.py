"""Delone subsets of lattices in SOL, higher-rank solvable groups and BS(1,m).

Construction of the candidate non-rectifiable sets by substitution tilings
with two alternating densities, plus the numeric side of the supporting
arguments: exact density identities, Folner volume/boundary estimates,
lattice comparison inequalities, and the obstruction chains against
product-form companion quasi-isometries.
"""

from .geometry import (
    BSSpec,
    HRSpec,
    QIParams,
    SOL_IDENTITY,
    SolPoint,
    SolSpec,
    even_scaling_witness,
    sol_dist,
    sol_inv,
    sol_mul,
)
from .madic import (
    BsPoint,
    CylinderMap,
    MadicBall,
    MadicRational,
    ball_decompose_image,
    bs_dist,
    madic_dist,
    madic_valuation,
    unit_ball,
)
from .lattice import (
    BsBox,
    DeloneSet,
    LatticePoint,
    LatticePointSet,
    LatticeSpec,
    SolBox,
    bs_box_count,
    delone_constants,
    embed,
    enumerate_bs,
    enumerate_sol_lattice,
    snap,
)
from .tiling import (
    DensityProfile,
    SolTilingConfig,
    TileAddress,
    assign_types_sol,
    base_tile_points,
    bs_tile_counts,
    build_delone,
    decompose_bs,
    decompose_hr,
    decompose_sol,
    hr_tile_counts,
    min_feasible_n0,
    sol_tile_counts,
    sol_tile_tree,
    verify_density_identities,
)
from .folner import (
    bs_boundary_bound,
    compare_sandwich,
    discrete_boundary,
    first_lemma_check,
    hr_box_volume,
    hr_volume_monte_carlo,
    sol_boundary_exact,
    sol_box_volume,
    sol_shell_volume,
    volstr_bounds,
)
from .obstruction import (
    CompanionMap,
    ObstructionParams,
    PLMap,
    certify_obstruction,
    chain_descend,
    chain_steps,
    derive_params,
    key_lemma_gap,
    stretch_search,
)

__version__ = "0.1.0"
