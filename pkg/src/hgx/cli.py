"""``hgx`` command-line interface.

Machine-readable results go to stdout (JSON, or CSV for ``diffuse``);
diagnostics go to stderr.  Exit codes: 0 success, 1 validation error or bad
usage, 2 numerical failure, 3 unreadable or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys

import numpy as np

from . import io
from .edvw import concat_modalities, knn_gaussian_hypergraph, protein_hypergraph
from .equiv import check_equivalence_conditions, clique_graph
from .errors import FormatError, NumericalError, ValidationError
from .hypergraph import RHO_KINDS, RhoSpec, build_hypergraph, validate
from .models import VARIANTS
from .partition import cut_objective, cut_sweep
from .spectral import convergence_bound_check, spectrum, unified_laplacian
from .train import TrainConfig, train
from .walk import (
    oracle_matrix,
    stationary_distribution,
    transition_matrix,
    transition_matrix_nonlazy,
)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(io.jsonable(obj)))


def _on_off(s: str) -> bool:
    if s not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return s == "on"


def cmd_build(a):
    records = io.read_incidence(a.incidence)
    weights = io.read_edge_weights(a.weights) if a.weights else None
    if a.rho == "power":
        rho = RhoSpec("power", a.sigma)
    elif a.rho == "custom_table":
        raise ValidationError("custom_table rho cannot be given on the command line; edit the JSON")
    else:
        rho = RhoSpec(a.rho)
    h = build_hypergraph(records, weights, rho,
                         default_weight=None if a.require_weights else 1.0)
    sys.stdout.write(io.dumps_hypergraph(h))


def cmd_validate(a):
    _emit(validate(io.load_hypergraph(a.file)).to_dict())


def cmd_stationary(a):
    h = io.load_hypergraph(a.file)
    target = transition_matrix_nonlazy(h, allow_isolated=True) if a.nonlazy else h
    sd = stationary_distribution(target, mode=a.mode, tol=a.tol, max_iters=a.max_iters)
    _emit({"pi": sd.pi, "method": sd.method, "residual": sd.residual,
           "isolated": [h.vertex_ids[i] for i in sd.isolated]})


def cmd_check_equiv(a):
    _emit(check_equivalence_conditions(io.load_hypergraph(a.file), a.tol).to_dict())


def cmd_clique(a):
    g = clique_graph(io.load_hypergraph(a.file))
    if a.no_self_loops:
        g = g.without_self_loops()
    out = io.matrix_to_dict(g.Wc, g.vertex_ids, sparse=a.sparse)
    out["source"] = g.source
    _emit(out)


def cmd_laplacian(a):
    h = io.load_hypergraph(a.file)
    b = unified_laplacian(h)
    M = b.T_tilde if a.renorm else b.L
    out = io.matrix_to_dict(M, h.vertex_ids, sparse=a.sparse)
    out["operator"] = "T_tilde" if a.renorm else "L"
    _emit(out)


def cmd_spectrum(a):
    h = io.load_hypergraph(a.file)
    b = unified_laplacian(h)
    _emit(spectrum(b.T_tilde if a.renorm else b.L).to_dict())


def cmd_diffuse(a):
    h = io.load_hypergraph(a.file)
    trace, passed = convergence_bound_check(h, a.source, a.steps)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "l1_error", "bound", "e", "e_low"])
    for row in trace.rows():
        w.writerow([row[0]] + [repr(x) for x in row[1:]])
    sys.stdout.write(buf.getvalue())
    print(f"lambda_H={trace.lambda_H!r} bound_holds={passed}", file=sys.stderr)


def cmd_knn_build(a):
    tables = [io.read_features(p, modality=f"m{i}") for i, p in enumerate(a.features)]
    hs = [knn_gaussian_hypergraph(t, a.k, a.gamma) for t in tables]
    sys.stdout.write(io.dumps_hypergraph(concat_modalities(hs)))


def cmd_protein_build(a):
    chain = io.read_protein(a.chain)
    h = protein_hypergraph(chain, a.tau, a.epsilon, a.gamma)
    sys.stdout.write(io.dumps_hypergraph(h))


def cmd_train(a):
    h = io.load_hypergraph(a.file)
    feats = io.read_features(a.features)
    if feats.ids != h.vertex_ids:
        index = {v: i for i, v in enumerate(feats.ids)}
        missing = [v for v in h.vertex_ids if v not in index]
        if missing:
            raise ValidationError(f"no features for vertex {missing[0]!r}")
        X = feats.X[[index[v] for v in h.vertex_ids]]
    else:
        X = feats.X
    labels, masks, classes = io.read_labels(a.labels, h.vertex_ids)
    cfg = TrainConfig(learning_rate=a.lr, weight_decay=a.wd, max_epochs=a.epochs,
                      patience=min(a.patience, a.epochs), seed=a.seed)
    opts = {"hidden": a.hidden, "num_layers": a.layers, "dropout_rate": a.dropout,
            "alpha": a.alpha}
    if a.K is not None:
        opts["K"] = a.K
    if a.renorm is not None:
        opts["use_renormalization"] = a.renorm
    res = train(a.variant, h, X, labels, masks, cfg, **opts)
    if a.loss_curve:
        with open(a.loss_curve, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_loss", "val_loss"])
            for i, (tl, vl) in enumerate(zip(res.train_loss, res.val_loss), 1):
                w.writerow([i, repr(tl), repr(vl)])
    _emit({"variant": a.variant, "accuracy": res.accuracy, "best_epoch": res.best_epoch,
           "epochs_run": res.epochs_run, "classes": classes,
           "use_renormalization": res.params.use_renormalization})


def cmd_cut(a):
    h = io.load_hypergraph(a.file)
    subset = [s for s in a.subset.split(",") if s]
    _emit(cut_objective(h, subset, use_power_iteration=a.power).to_dict())


def cmd_cut_sweep(a):
    best, scores = cut_sweep(io.load_hypergraph(a.file))
    out = best.to_dict()
    out["sweep"] = scores
    _emit(out)


def cmd_oracle_compare(a):
    h = io.load_hypergraph(a.file)
    P = transition_matrix(h).toarray()
    _emit({"max_abs_diff": float(np.abs(P - oracle_matrix(h)).max())})


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hgx", description="Hypergraph random walks, Laplacians and models.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def add(name, func, help_, file=True):
        sp_ = sub.add_parser(name, help=help_, description=help_)
        if file:
            sp_.add_argument("file", help="hypergraph JSON file")
        sp_.set_defaults(func=func)
        return sp_

    s = add("build", cmd_build, "build hypergraph JSON from an incidence CSV", file=False)
    s.add_argument("incidence", help="CSV with header vertex,edge,q1,q2")
    s.add_argument("--weights", help="CSV with header edge,w")
    s.add_argument("--rho", default="power", choices=[k for k in RHO_KINDS])
    s.add_argument("--sigma", type=float, default=-1.0, help="exponent for --rho power")
    s.add_argument("--require-weights", action="store_true",
                   help="fail when an edge has no weight instead of using 1.0")

    add("validate", cmd_validate, "structural report (connectivity, edge independence)")

    s = add("stationary", cmd_stationary, "stationary distribution of the walk")
    s.add_argument("--mode", choices=["auto", "closed", "power"], default="auto")
    s.add_argument("--nonlazy", action="store_true", help="use the non-lazy walk")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--max-iters", type=int, default=100000)

    s = add("check-equiv", cmd_check_equiv, "equivalence conditions as JSON")
    s.add_argument("--tol", type=float, default=1e-9)

    s = add("clique", cmd_clique, "equivalent clique-graph weights")
    s.add_argument("--no-self-loops", action="store_true", help="drop the diagonal")
    s.add_argument("--sparse", action="store_true", help="coordinate-list output")

    s = add("laplacian", cmd_laplacian, "unified Laplacian, or T~ with --renorm on")
    s.add_argument("--renorm", type=_on_off, default=False, metavar="{on,off}")
    s.add_argument("--sparse", action="store_true", help="coordinate-list output")

    s = add("spectrum", cmd_spectrum, "eigenvalues of L (or T~ with --renorm on)")
    s.add_argument("--renorm", type=_on_off, default=False, metavar="{on,off}")

    s = add("diffuse", cmd_diffuse, "diffusion trace CSV: k,l1_error,bound,e,e_low")
    s.add_argument("--source", required=True, help="source vertex id")
    s.add_argument("--steps", type=int, default=50)

    s = add("knn-build", cmd_knn_build, "k-NN Gaussian hypergraph from features", file=False)
    s.add_argument("features", nargs="+",
                   help="feature CSV(s) or .npy; several files are concatenated as modalities")
    s.add_argument("--k", type=int, default=10)
    s.add_argument("--gamma", type=float, default=1.0)

    s = add("protein-build", cmd_protein_build, "protein sequence/spatial hypergraph",
            file=False)
    s.add_argument("chain", help="CSV with header index,aa_code,x,y,z")
    s.add_argument("--tau", type=int, default=6)
    s.add_argument("--epsilon", type=float, default=8.0)
    s.add_argument("--gamma", type=float, default=0.1)

    s = add("train", cmd_train, "train a model and print metrics JSON")
    s.add_argument("--features", required=True)
    s.add_argument("--labels", required=True, help="CSV with header id,label,split")
    s.add_argument("--variant", choices=VARIANTS, default="h_gcn")
    s.add_argument("--layers", type=int, default=2)
    s.add_argument("--hidden", type=int, default=16)
    s.add_argument("--K", type=int, default=None, help="diffusion steps / polynomial order")
    s.add_argument("--alpha", type=float, default=0.1)
    s.add_argument("--dropout", type=float, default=0.5)
    s.add_argument("--lr", type=float, default=0.01)
    s.add_argument("--wd", type=float, default=5e-4)
    s.add_argument("--epochs", type=int, default=300)
    s.add_argument("--patience", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--renorm", type=_on_off, default=None, metavar="{on,off}",
                   help="default: off for hgnn_baseline, on otherwise")
    s.add_argument("--loss-curve", help="write epoch,train_loss,val_loss CSV here")

    s = add("cut", cmd_cut, "normalized-cut objective of a vertex subset")
    s.add_argument("--subset", required=True, help="comma-separated vertex ids")
    s.add_argument("--power", action="store_true",
                   help="use a power-iterated stationary distribution")

    add("cut-sweep", cmd_cut_sweep, "heuristic spectral sweep cut")
    add("oracle-compare", cmd_oracle_compare, "max |P - brute-force two-step oracle|")
    return p


def dispatch(argv=None) -> int:
    """Run one command and return its exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_VALIDATION
    except (FormatError, OSError) as exc:
        print(f"hgx: input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"hgx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValidationError as exc:
        print(f"hgx: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch())
