"""Markov chains on poset block structures.

Exact construction of generalized crested products and insect chains,
three lumping constructions with exact verification, wreath-group
orbit machinery including group reconstruction on rooted trees, and
spectral analysis of reversible chains.
"""

from .errors import PosetLumpError
from .lumping import (
    GeneralizedLumpingSpec,
    LumpedChain,
    Partition,
    compose_lumpings,
    deletion_closed_form,
    deletion_partition,
    direct_product_partition,
    generalized_product_partition,
    indicator_invariance,
    is_lumping,
    lump,
    lump_measure,
    reduced_crested_equivalence,
)
from .poset import (
    AncestralFamily,
    Poset,
    ancestral_subsets,
    antichain_poset,
    chain_poset,
    fibered_over,
    poset_from_covers,
    reduced_poset,
    validate_poset,
)
from .products import (
    CrestedSpec,
    InsectCoefficients,
    block_distance,
    crested_entry,
    crested_product,
    insect_coefficients,
    insect_operator,
    tree_insect_entry,
    tree_insect_operator,
)
from .spectral import (
    Spectrum,
    antichain_modules,
    distinct_eigenvalue_count_check,
    lift_eigenfunction,
    project_eigenfunction,
    spectrum,
    spectrum_included,
    spherical_eigenfunction,
    tree_spectrum,
)
from .stochastic import (
    MarkovOperator,
    Measure,
    ProductIndex,
    convex_combination,
    detailed_balance,
    identity,
    kron,
    uniform,
    uniform_measure,
)
from .wreath import (
    OrbitPartition,
    WreathGenerator,
    check_invariance,
    enumerate_lumpings,
    full_wreath_generators,
    is_group_induced,
    orbit_lump,
    orbits,
    profile_invariance_check,
    project_partition,
    reconstruct_group,
    sphere_partition,
    sphere_profile,
    stabilizer_generators,
)

__version__ = "0.1.0"
