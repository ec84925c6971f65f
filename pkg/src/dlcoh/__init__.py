"""Exact cohomology of Deligne-Lusztig varieties for GL_n over F_q.

The package computes, for words in the simple reflections of S_n, the
compactly supported cohomology of the associated Deligne-Lusztig variety and
the cohomology of its Demazure compactification, with Frobenius (Tate twist)
grading, as exact integer multiplicities of unipotent representations.
"""

from .cohomology import (
    CohResult,
    GradingAssignment,
    ModelInconsistency,
    closure_coh,
    coxeter_closure_coh,
    coxeter_open_coh,
    degree_top_minus2,
    dl_coh,
    e1_row,
    euler_char,
    grading_assignment,
    height1_coh,
    nonfull_coh,
    tate1_slice,
    validate,
)
from .permcomplex import (
    ChainComplex,
    PermutationModule,
    Summand,
    complex_check,
    complex_cohomology,
    identity_coset_map,
    module_character,
)
from .repring import (
    CharacterTable,
    GradedModule,
    VirtualModule,
    character_table,
    dual_symmetric,
    i_P,
    induce_product,
    irreducible,
    twist_shift,
    v_P,
)
from .words import (
    Mask,
    Permutation,
    RewriteMove,
    Word,
    apply_move,
    cycle_type,
    find_sws_form,
    gamma,
    height,
    is_hypersquare,
    is_reduced,
    meet,
    pair_reduction,
    word,
    word_stats,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
