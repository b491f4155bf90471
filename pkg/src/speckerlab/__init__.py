"""Exact-arithmetic laboratory for Menger-boundedness of finite powers of
Baer-Specker subgroups: kernel lattices, growth scales, interval-constant
generators, and machine-checkable certificates for both halves of the
k-th-power-bounded / (k+1)-st-power-unbounded dichotomy.
"""

from .boundcheck import (
    certify_unbounded,
    check_cond2_cond3,
    check_cond4,
    convert_4_to_3,
    convert_cover_to_f,
    good_set,
    reshape_klem,
    sample_combinations,
    scheepers_check,
    verify_preservation,
)
from .config import Config
from .construction import (
    GeneratorFamily,
    PhiScale,
    StageResult,
    StepFunction,
    build_family,
    build_stage,
    eval_combination,
    phi_m,
)
from .errors import (
    AuditFailure,
    DominationFails,
    HorizonExceeded,
    NoNonzeroKernel,
    SpeckerLabError,
    StageMissing,
)
from .funalg import (
    RuleSeed,
    StageSeeds,
    TableSeed,
    Unknown,
    add,
    closure_seeds,
    enumerate_fragment,
    evaluate,
    hat,
    is_unknown,
    max_pair,
    neg,
    seed,
    threshold_min,
)
from .intervals import IntervalSet
from .intlat import (
    IntMatrix,
    IntVector,
    KernelBasis,
    brute_min_solution,
    kernel_basis,
    min_feasible_box,
    min_solution,
)
from .scales import (
    MatrixEnumeration,
    Scale,
    block_of_matrix,
    diag_scale,
    dprime_condition,
    f_ll_h,
    matrix_for_block,
    nwd_extend,
    partition_block,
    standin_family,
)

__version__ = "0.1.0"
