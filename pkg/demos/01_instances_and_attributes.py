"""Parse project instances and inspect their critical-path attributes.

Walks through the three supported text formats with a small 4-activity
project, then prints the normalized attribute table that later serves as
the terminal set for priority rules.
"""
from qdsched import (
    attribute_table,
    closures,
    forward_pass,
    parse_patterson,
    parse_psplib,
    serialize_instance,
)
from qdsched.cpm import ATTRIBUTE_NAMES, attribute_csv

# A Patterson-format project: header "activities resources", capacities,
# then one record per activity (duration, requirements, successor count,
# successor IDs). Activities 1 and 6 are the dummy source/sink.
PATTERSON = """\
6 2
4 3
0  0 0  3  2 3 4
3  2 1  1  5
2  1 2  1  5
4  2 0  1  5
2  1 1  1  6
0  0 0  0
"""

project = parse_patterson(PATTERSON, "demo")
print(f"parsed {project.id!r}: {project.num_real_activities} real activities, "
      f"{project.num_resources} resources, capacities {project.capacities}")

# The canonical internal form round-trips, with metadata carried in comments.
canonical = serialize_instance(project)
assert parse_patterson(canonical) == project
print("\ncanonical form:")
print(canonical)

# Critical-path analysis ignores the resources and bounds the makespan.
es, ef = forward_pass(project)
print(f"earliest starts:   {es}")
print(f"earliest finishes: {ef}  -> lower bound {ef[project.sink]}")

preds, succs = closures(project)
print(f"transitive predecessor counts: {preds}")
print(f"transitive successor counts:   {succs}")

# All ten attributes are scaled into [0, 1]; raw CPM times stay available.
attrs = attribute_table(project)
print(f"\nattribute columns: {', '.join(ATTRIBUTE_NAMES)}")
print(attribute_csv(project, attrs))
