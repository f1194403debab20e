"""Near-minimum circuit enumeration for binary and regular matroids."""

from .decomposition import (
    Signature,
    balanced_division,
    bound_report,
    enumerate_class,
    enumerate_light_codewords,
    enumerate_near_min_circuits,
    find_center,
    signature_of,
)
from .gf2 import (
    BinaryMatroid,
    add_parallel,
    builtin,
    decompose_symmetric_difference,
    delete,
    dual,
    enumerate_circuits,
    is_circuit,
    rank,
)
from .graphs import (
    WeightedGraph,
    cographic_matroid,
    enumerate_cycles,
    enumerate_min_cutsets,
    graphic_matroid,
    graphic_set_bound,
    small_cut,
)
from .ksum import (
    SumKind,
    Udt,
    check_associativity,
    classify_circuit,
    delta_sum,
    evaluate_udt,
    project_circuit,
    random_udt,
)
from .lattice import (
    conformal_decompose,
    enumerate_short_vectors,
    is_conformal,
    is_totally_unimodular,
    matrix_circuits,
)

__version__ = "0.1.0"
