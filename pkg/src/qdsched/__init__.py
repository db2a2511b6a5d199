"""Quality-diversity evolution of priority rules for project scheduling.

The package covers the full pipeline: parsing benchmark RCPSP instances,
critical-path analysis and normalized activity attributes, an arithmetic
rule language with the classic human-designed rules, a parallel schedule
generator with deviation-based fitness, a MAP-Elites archive next to a
tournament GP baseline, and an experiment harness with CSV reports.
"""

from .cpm import ATTRIBUTE_NAMES, AttributeTable, attribute_table, backward_pass, closures, forward_pass
from .evolution import (
    Archive,
    EvolutionConfig,
    GridConfig,
    Individual,
    bin_features,
    coverage,
    crossover,
    mutate,
    random_individual,
    run_gphh,
    run_mehh,
    select_representative,
    unique_fraction,
)
from .instances import (
    Instance,
    InstanceMeta,
    ParseError,
    load_meta,
    parse_instance_file,
    parse_patterson,
    parse_psplib,
    serialize_instance,
)
from .rules import (
    BUILTIN_RULES,
    BuiltinRule,
    Expr,
    MAX_HEIGHT,
    RuleSyntaxError,
    eval_builtin,
    eval_expr,
    infix,
    node_count,
    parse_infix,
    parse_rule,
    resource_node_count,
    serialize,
)
from .scheduling import (
    FitnessReport,
    PreparedSet,
    Schedule,
    ScheduleError,
    deviation,
    evaluate_rule,
    normalized_slack,
    prepare,
    psgs,
    resource_profile,
    schedule_slack,
    verify_schedule,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
