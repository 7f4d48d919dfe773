"""From prose to structured data, and from structured data to declarations.

A problem description plus its data file become a structured document:
parameters, decision variables, constraint anchors, and the objective
anchor. The parameters and variables render deterministically; the anchors
keep their natural-language sentences for the correction loop.

Run: python demos/01_structured_data.py
"""

from _shared import load_problem, load_structured_json

from optanchor import (
    default_dialect,
    parse_structured_data,
    render_simple,
    semantic_anchors,
    serialize_structured_data,
)

problem = load_problem()
structured = parse_structured_data(load_structured_json(), problem)

print(f"problem: {problem.id}")
print(f"parameters: {[p.symbol for p in structured.parameters]}")
print(f"variables: {[v.symbol for v in structured.variables]}")
print()

print("semantic anchors (constraints first, objective last):")
for anchor in semantic_anchors(structured):
    print(f"  [{anchor.anchor_id}] {anchor.kind}: {anchor.description}")
print()

dialect = default_dialect()
print(f"deterministic declarations ({dialect.name}):")
for symbol, code in render_simple(structured, dialect):
    print(f"  {code}")
print()

round_tripped = parse_structured_data(serialize_structured_data(structured), problem)
print(f"serialize -> parse round trip preserves the document: {round_tripped == structured}")
