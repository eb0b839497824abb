"""(eps, n)-complexity functions and the empirical measures on optimal separated sets."""
from .bowen import (
    bowen_distance,
    continuity_modulus,
    expansivity_profile,
    is_separated,
    orbit,
    orbit_table,
    pair_times,
)
from .complexity import (
    box_dimension_estimate,
    complexity_curve,
    entropy_estimate,
    growth_diagnostic,
    iet_complexity_closed_form,
    sft_complexity_exact,
)
from .measures import EmpiricalMeasure, measure_sequence, perron
from .separated import closeness_graph, exact_maximum, greedy_maximal, hall_injection
from .systems import (
    Circle,
    Doubling,
    Iet,
    Labeled,
    Rotation,
    Sft,
    TwoCircle,
    Word,
    candidates,
    system_from_json,
)

__version__ = "0.1.0"
