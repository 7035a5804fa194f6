"""
Orbits, dependency digraph and excursion levels
===============================================

W3 is the interesting one: five strong components, one sink.
"""
from treewalk import walks
from treewalk.digraph import build_digraph, condense, grading, to_dot
from treewalk.xi_psi import build_psi

for name in ("nn3", "w1", "w2", "w3"):
    s = build_psi(walks.NAMED[name]())
    cond = condense(build_digraph(s))
    print(f"{name}: {len(s)} orbits, {len(s.monomials)} monomials, "
          f"{len(cond.components)} components")

# %%
s = build_psi(walks.w3())
d = build_digraph(s)
cond = condense(d)
grades = grading(s)
for ci, comp in enumerate(cond.components):
    tag = "sink" if ci in cond.sinks else ""
    levels = [grades.levels[v] for v in comp]
    print(f"scc{ci} {tag:4} members={comp} levels={levels}")

# %%
# Each orbit with a finite level has bounded excursion; the sink is exactly
# the set of unbounded ones.
print([s.label(v) for v in cond.components[cond.sinks[0]]][:4], "...")

# %%
# Graphviz text, e.g. pipe into `dot -Tsvg`.
print(to_dot(d, cond)[:400])
