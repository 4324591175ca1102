"""
An inner product on the cochains of a circle from its fundamental cycle
=======================================================================

"""
from pathlib import Path

from opbench import pd

data = Path(__file__).resolve().parents[1] / "data"
K = pd.load_complex((data / "circle.complex").read_text())
mu = pd.load_cycle((data / "circle.cycle").read_text(), K)
print("simplices:", K.space().names)
print("fundamental cycle:", pd.verify_fundamental_cycle(K, mu).as_dict())

# d1 is the boundary, d2 the symmetrized front/back splitting, higher terms solved locally
A = pd.extend_homotopy_comm(K, 4)
for s, name in enumerate(K.space().names):
    print(f"d(x_{name}) has {len(A.d.images[s])} terms")

report = pd.run_pd(K, mu, 4, symmetric=True)
print("construction ok:", report.ok, " symmetric:", report.symmetry.ok)
print("lowest part equals the cap pairing:", report.lowest_matches_cap)
for u, img in sorted(report.f_coefficients().items()):
    print(u, "->", img)
