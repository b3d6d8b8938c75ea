"""Equational theories of finite monoids.

Classify identities by structural properties, build the pivotal finite
monoids and check satisfaction by brute force, derive identities
constructively from the finite bases, and decide the finite basis property
for products A_0^1 x S(W).
"""

from .words import (
    EMPTY,
    OccRef,
    W,
    Word,
    blocks,
    blocks12,
    delete,
    is_compact,
    is_x_compact,
    is_xy_compact,
    parse_word,
    scattered_subwords,
    simon_equiv,
)
from .identities import (
    I,
    Identity,
    SIGMA_1,
    SIGMA_2,
    SIGMA_MU,
    blbal1_condition,
    canonicalize,
    classify,
    find_critical_pair,
    parse_identity,
    sigma_type,
    substitute,
    unstable_pairs,
)
from .monoids import (
    FiniteMonoid,
    IsotermVerdict,
    build_A01,
    build_reflexive_relations,
    build_SW,
    direct_product,
    is_b_unstable,
    is_isoterm_bounded,
    satisfies,
)
from .derivation import (
    DerivationTrace,
    RewriteSystem,
    axil_transform,
    compact_normal_form,
    delta_closure,
    derivable,
    derive_J3,
    derive_P12_block_balanced,
    derive_block_balanced,
    measure_decreasing_derive,
    rewrite_neighbors,
)
from .fb import (
    FBVerdict,
    WFamily,
    chain_monoid,
    chain_product,
    check_abtab,
    check_fbS3,
    check_fbtlem,
    check_fbtlem1,
    fact_w12_check,
    theorem_alg_decide,
    wfamily,
)

__version__ = "0.1.0"
