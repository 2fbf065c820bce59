"""Value-based distances between information structures in zero-sum games."""

from .distance import (
    DistanceResult,
    GapCertificate,
    OrderRelation,
    approx_knowledge_bound,
    check_complements,
    check_substitutes,
    compare,
    diameter_bounds,
    distance,
    distance_d1,
    joint_info_bound,
    one_sided_gap,
    transfer_strategy,
)
from .games import PayoffFunction, ValueCertificate, value, value_oracle_enumeration
from .hierarchy import fixed_point_partition, hierarchy_joint_distribution, hierarchy_partition, is_non_redundant
from .structures import (
    FactoredStructure,
    Garbling,
    InfoStructure,
    eps_cond_independence,
    garble_left,
    garble_right,
    marginal,
    tv_norm,
)

__version__ = "0.1.0"

__all__ = [
    "DistanceResult",
    "FactoredStructure",
    "GapCertificate",
    "Garbling",
    "InfoStructure",
    "OrderRelation",
    "PayoffFunction",
    "ValueCertificate",
    "approx_knowledge_bound",
    "check_complements",
    "check_substitutes",
    "compare",
    "diameter_bounds",
    "distance",
    "distance_d1",
    "eps_cond_independence",
    "fixed_point_partition",
    "garble_left",
    "garble_right",
    "hierarchy_joint_distribution",
    "hierarchy_partition",
    "is_non_redundant",
    "joint_info_bound",
    "marginal",
    "one_sided_gap",
    "transfer_strategy",
    "tv_norm",
    "value",
    "value_oracle_enumeration",
]
