"""
Caverns of a height profile and of a sampled path
=================================================
"""
import numpy as np

from treewalk import walks
from treewalk.cavern import build_cavern, cavern_of_path
from treewalk.group_tree import IDENTITY
from treewalk.oracle import sample_restricted_path
from treewalk.xi_psi import build_psi

g = (3, 4, 5, 4, 3, 5, 4, 2)
tree = build_cavern(g)
print("root", tree.root)
for child, parent in sorted(tree.edges):
    print(f"  {child} -> {parent}")

# %%
# Same thing for an actual first-passage path of W1.
system = build_psi(walks.w1())
rng = np.random.default_rng(3)
o = system.orbits[5]
path = sample_restricted_path(system.mu, o.a, o.b, IDENTITY, 9, rng)
print("path:", [system.group.format(w) for w in path])
lab = cavern_of_path(system.mu, path, IDENTITY, system)
for iv in sorted(lab.labels, key=lambda iv: (iv[1] - iv[0], iv)):
    print(f"  {iv}: orbit {lab.orbit_ids[iv]}")
