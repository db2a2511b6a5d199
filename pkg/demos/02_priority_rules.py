"""Express, evaluate, and compare priority rules.

Priority rules map each activity to a scalar; the scheduler starts the
lowest value first. Classic single-attribute rules ship as built-ins, and
arbitrary arithmetic combinations of the normalized attributes form the
rule language the evolutionary search explores.
"""
from qdsched import (
    BUILTIN_RULES,
    attribute_table,
    eval_builtin,
    eval_expr,
    infix,
    node_count,
    parse_infix,
    parse_rule,
    resource_node_count,
    serialize,
)
from qdsched.catalog import EVOLVED_RULES, load_evolved_rule
from qdsched.instances import parse_patterson

project = parse_patterson(
    "6 2\n4 3\n0 0 0 3 2 3 4\n3 2 1 1 5\n2 1 2 1 5\n4 2 0 1 5\n2 1 1 1 6\n0 0 0 0\n",
    "demo",
)
attrs = attribute_table(project)

# Built-in rules operate on raw quantities. Rules whose textbook form picks
# the maximum (MTS, GRPW, GRD) come back negated so lower is always better.
print("built-in rule values per activity (lower schedules first):")
for name in ("SPT", "LFT", "MTS", "GRPW"):
    values = [eval_builtin(BUILTIN_RULES[name], project, attrs, j) for j in range(6)]
    print(f"  {name:5s} {values}")

# The rule language: seven operators over ten normalized attribute leaves,
# written in a canonical prefix form.
rule = parse_rule("(Add LF (Neg1 (Div TSC AvgRReq)))")
print(f"\nrule {serialize(rule)}")
print(f"  infix: {infix(rule)}")
print(f"  nodes: {node_count(rule)}, resource leaves: {resource_node_count(rule)}")
print(f"  priorities: {[round(float(v), 3) for v in eval_expr(rule, attrs)]}")

# Division is guarded (zero when the divisor is not positive), so every
# rule is total over every instance.
guarded = parse_rule("(Div ES (Neg1 LF))")
print(f"\n{infix(guarded)} on activity 2 -> {eval_expr(guarded, attrs, 2)}")

# Simplified rules from earlier large-scale experiments ship in the catalog
# and parse from their infix form (constants included).
name = "MEHH_8000-B"
evolved = load_evolved_rule(name)
print(f"\ncatalog rule {name} ({node_count(evolved)} nodes):")
print(f"  {EVOLVED_RULES[name][:70]}...")
print(f"  priorities: {[round(float(v), 2) for v in eval_expr(evolved, attrs)]}")
