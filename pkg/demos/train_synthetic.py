"""Semi-supervised node classification on a synthetic two-community hypergraph.

Run with ``python3 demos/train_synthetic.py``.
"""

from hgx import TrainConfig, train
from hgx import fixtures as F
from hgx.models import VARIANTS

ds = F.two_block_dataset(seed=0)
print(f"{ds.h.n_vertices} vertices, {ds.h.n_edges} hyperedges, "
      f"{int(ds.train.sum())} training labels")

cfg = TrainConfig(max_epochs=300, seed=0)
for variant in VARIANTS:
    res = train(variant, ds.h, ds.X, ds.labels, ds, cfg, dropout_rate=0.5)
    print(f"{variant:14s} test accuracy {res.accuracy['test']:.3f} "
          f"(best epoch {res.best_epoch})")

# Deep stacks of propagation layers smooth every vertex towards the same vector.
for layers in (2, 8, 32):
    res = train("h_gcn", ds.h, ds.X, ds.labels, ds, cfg, num_layers=layers, dropout_rate=0.5)
    print(f"h_gcn with {layers:2d} layers: test accuracy {res.accuracy['test']:.3f}")
