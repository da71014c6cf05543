"""Batch command-line interface and file formats.

Subcommands wire the library into reproducible pipelines:

* ``generate``  -- sample a synthetic model and data set from a JSON config
* ``sort``      -- estimate a topological ordering from a CSV data matrix
* ``eval``      -- compare an estimated ordering against a truth file
* ``benchmark`` -- run a generate/sort/eval grid, one JSONL record per replicate
* ``fit``       -- OLS coefficients and noise scales given data and an ordering
* ``loglik``    -- held-out mean log-likelihood of a fitted model

Formats: data is RFC-4180 CSV with header v0..v{p-1} and full round-trip
float precision; graphs, orderings, and models are JSON; node indices are
0-based everywhere.  Exit codes: 0 success, 1 computation error, 2
usage/IO error.  Outputs are byte-stable across re-runs; measured wall
times are only emitted under ``--timings``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .metrics import fit_coefficients, heldout_loglik, order_error, reversed_edge_count
from .model import (
    Dag,
    DataMatrix,
    NeighborhoodSets,
    NoiseFamily,
    Ordering,
    WeightedDag,
    is_topological,
)
from .neighborhoods import full_neighborhoods, markov_blankets, top_correlated
from .regression import apply_moments, column_moments, standardize
from .simulate import (
    STREAM_REPLICATE,
    STREAM_SPLIT,
    FromDag,
    LargeSparse,
    SimConfig,
    derive_seed,
    rng_stream,
    sample_dataset,
)
from .sorter import SortConfig, SortResult, sort as run_sort


class UsageError(Exception):
    """Bad arguments, unreadable files, or invalid configuration (exit 2)."""


# ---------------------------------------------------------------------------
# file formats


def write_data_csv(path: str | Path, x: DataMatrix) -> None:
    """CSV with header v0..v{p-1}; floats carry full round-trip precision."""
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"v{k}" for k in range(x.p)])
        for row in x.values:
            writer.writerow([repr(float(v)) for v in row])
    os.replace(tmp, path)


def read_data_csv(path: str | Path) -> DataMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise UsageError(f"{path}: empty file") from None
        p = len(header)
        rows: list[list[float]] = []
        for i, row in enumerate(reader, start=2):
            if len(row) != p:
                raise UsageError(f"{path}:{i}: expected {p} fields, found {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise UsageError(f"{path}:{i}: {exc}") from None
    if not rows:
        raise UsageError(f"{path}: no data rows")
    return DataMatrix(np.asarray(rows))


def _read_json(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _write_json(path: str | Path, doc: object) -> None:
    tmp = Path(str(path) + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def family_to_doc(family: NoiseFamily) -> dict:
    doc: dict = {"tag": family.tag}
    if family.df is not None:
        doc["df"] = family.df
    return doc


def family_from_doc(doc: object, where: str) -> NoiseFamily:
    try:
        if isinstance(doc, str):
            return NoiseFamily.from_string(doc)
        if isinstance(doc, dict):
            return NoiseFamily(doc["tag"], df=doc.get("df"))
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{where}: {exc}") from None
    raise UsageError(f"{where}: expected a family string or object")


def truth_to_doc(w: WeightedDag, ordering: Ordering, seed: int) -> dict:
    return {
        "p": w.p,
        "edges": [{"from": j, "to": k, "weight": wt} for j, k, wt in w.weighted_edges()],
        "family": family_to_doc(w.family),
        "scales": [float(s) for s in w.scales],
        "ordering": list(ordering.perm),
        "seed": int(seed),
    }


def truth_from_doc(doc: dict, where: str = "truth") -> tuple[WeightedDag, Ordering, int]:
    try:
        p = int(doc["p"])
        edges = [(int(e["from"]), int(e["to"]), float(e["weight"])) for e in doc["edges"]]
        family = family_from_doc(doc["family"], where)
        scales = doc["scales"]
        ordering = Ordering(doc["ordering"])
        seed = int(doc["seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{where}: missing or malformed field ({exc})") from None
    dag = Dag.from_edges(p, [(j, k) for j, k, _ in edges])
    by_child: dict[int, dict[int, float]] = {}
    for j, k, wt in edges:
        by_child.setdefault(k, {})[j] = wt
    weights = [[by_child.get(k, {})[j] for j in dag.parents[k]] for k in range(p)]
    return WeightedDag(dag, weights, family, scales), ordering, seed


def load_edge_list(path: str | Path, p: int | None = None) -> Dag:
    """Whitespace-separated ``from to`` pairs, 0-based, one edge per line."""
    edges: list[tuple[int, int]] = []
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            if len(tokens) != 2:
                raise UsageError(f"{path}:{i}: expected 'from to', found {line.strip()!r}")
            try:
                edges.append((int(tokens[0]), int(tokens[1])))
            except ValueError:
                raise UsageError(f"{path}:{i}: node indices must be integers") from None
    inferred = 1 + max((max(j, k) for j, k in edges), default=-1)
    if p is None:
        p = inferred
    elif p < inferred:
        raise UsageError(f"{path}: edge list references node {inferred - 1} but p={p}")
    if p < 1:
        raise UsageError(f"{path}: empty edge list and no node count given")
    try:
        return Dag.from_edges(p, edges)
    except ValueError as exc:
        raise UsageError(f"{path}: {exc}") from None


def write_neighborhoods(path: str | Path, nbhd: NeighborhoodSets) -> None:
    _write_json(path, nbhd.to_lists())


def read_neighborhoods(path: str | Path) -> NeighborhoodSets:
    doc = _read_json(path)
    try:
        return NeighborhoodSets.from_lists(doc)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# configuration


def _require(doc: dict, field: str, where: str):
    if field not in doc:
        raise UsageError(f"{where}: missing required field {field!r}")
    return doc[field]


def parse_sim_config(doc: dict, base_dir: Path, where: str = "config") -> SimConfig:
    p = int(_require(doc, "p", where))
    n = int(_require(doc, "n", where))
    seed = int(_require(doc, "seed", where))
    family = family_from_doc(_require(doc, "family", where), f"{where}: field 'family'")
    graph_doc = _require(doc, "graph", where)
    scheme = _require(graph_doc, "scheme", f"{where}: field 'graph'")
    if scheme == "large-sparse":
        graph: LargeSparse | FromDag = LargeSparse(
            root_frac=float(graph_doc.get("root_frac", 0.05)),
            min_parents=int(graph_doc.get("min_parents", 1)),
            max_parents=int(graph_doc.get("max_parents", 2)),
        )
    elif scheme == "edge-list":
        rel = _require(graph_doc, "path", f"{where}: field 'graph'")
        graph = FromDag(load_edge_list(base_dir / rel, p=p))
    else:
        raise UsageError(f"{where}: unknown graph scheme {scheme!r}")
    try:
        return SimConfig(
            p=p,
            n=n,
            seed=seed,
            family=family,
            graph=graph,
            coef_low=float(doc.get("coef_low", 0.4)),
            coef_high=float(doc.get("coef_high", 0.9)),
            scale_low=float(doc.get("scale_low", 0.4)),
            scale_high=float(doc.get("scale_high", 0.7)),
        )
    except ValueError as exc:
        raise UsageError(f"{where}: {exc}") from None


def _split_rows(x: DataMatrix, frac: float, seed: int) -> tuple[DataMatrix, DataMatrix]:
    """Deterministic (holdout, remainder) row split; rows keep their order."""
    if not 0 < frac < 1:
        raise UsageError("holdout fraction must lie in (0, 1)")
    n_hold = int(math.floor(frac * x.n))
    if n_hold < 3 or x.n - n_hold < 2:
        raise UsageError(f"cannot split {x.n} rows with fraction {frac}")
    perm = rng_stream(seed, STREAM_SPLIT).permutation(x.n)
    hold = np.sort(perm[:n_hold])
    rest = np.sort(perm[n_hold:])
    return DataMatrix(x.values[hold]), DataMatrix(x.values[rest])


def resolve_neighborhoods(option: str, x: DataMatrix) -> tuple[NeighborhoodSets, DataMatrix, str]:
    """Parse ``full`` / ``file.json`` / ``corr:m:frac:seed``.

    Returns the sets, the rows left for estimation (the input minus any
    correlation holdout), and a normalized descriptor string.
    """
    if option == "full":
        return full_neighborhoods(x.p), x, "full"
    if option.startswith("corr:"):
        parts = option.split(":")
        if len(parts) != 4:
            raise UsageError("expected corr:m:frac:seed")
        try:
            m, frac, seed = int(parts[1]), float(parts[2]), int(parts[3])
        except ValueError as exc:
            raise UsageError(f"bad corr specification: {exc}") from None
        hold, rest = _split_rows(x, frac, seed)
        if not 0 < m < x.p:
            raise UsageError(f"corr: need 0 < m < p, got m={m}, p={x.p}")
        return top_correlated(hold, m), rest, option
    path = Path(option)
    if not path.exists():
        raise UsageError(f"neighborhood file not found: {option}")
    nbhd = read_neighborhoods(path)
    if nbhd.p != x.p:
        raise UsageError(f"{option}: covers {nbhd.p} nodes, data has {x.p}")
    return nbhd, x, option


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        raise UsageError(f"config file not found: {config_path}")
    cfg = parse_sim_config(_read_json(config_path), config_path.parent, where=str(config_path))
    w, ordering, x = sample_dataset(cfg)
    write_data_csv(args.out_data, x)
    _write_json(args.out_truth, truth_to_doc(w, ordering, cfg.seed))
    print(json.dumps({"data": str(args.out_data), "truth": str(args.out_truth),
                      "p": cfg.p, "n": cfg.n, "edges": w.dag.edge_count}))
    return 0


def _sort_data(x: DataMatrix, args: argparse.Namespace) -> tuple[SortResult, NeighborhoodSets, DataMatrix, str]:
    family = family_from_doc(args.family, "--family")
    nbhd, rows, descriptor = resolve_neighborhoods(args.neighborhoods, x)
    cfg = SortConfig(
        family=family,
        neighborhoods=nbhd,
        mode=args.mode,
        trace=args.trace,
        updates_within_neighborhood=args.restrict_updates,
    )
    return run_sort(rows, cfg), nbhd, rows, descriptor


def cmd_sort(args: argparse.Namespace) -> int:
    x = read_data_csv(args.data)
    result, _, rows, descriptor = _sort_data(x, args)
    doc = {
        "p": x.p,
        "n_sorted": rows.n,
        "family": args.family,
        "mode": args.mode,
        "neighborhoods": descriptor,
        "ordering": list(result.ordering.perm),
        "update_count": result.update_count,
        "wall_time_ms": result.wall_time * 1e3 if args.timings else None,
        "diagnostics": {
            "degenerate": [[k, t] for k, t in result.diagnostics.get("degenerate", [])],
            "skipped_updates": len(result.diagnostics.get("skipped_updates", [])),
            "truncated": [list(row) for row in result.diagnostics.get("truncated", [])],
        },
    }
    if result.step_scores is not None:
        doc["step_scores"] = [[[k, s] for k, s in step] for step in result.step_scores]
    _write_json(args.out, doc)
    print(json.dumps({"ordering": str(args.out), "update_count": result.update_count}))
    return 0


def read_ordering(path: str | Path) -> Ordering:
    doc = _read_json(path)
    try:
        return Ordering(doc["ordering"])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def cmd_eval(args: argparse.Namespace) -> int:
    w, _, _ = truth_from_doc(_read_json(args.truth), where=str(args.truth))
    ordering = read_ordering(args.ordering)
    if ordering.p != w.p:
        raise UsageError(f"ordering has {ordering.p} nodes, truth has {w.p}")
    print(json.dumps({
        "order_error": order_error(w.dag, ordering),
        "is_topological": is_topological(w.dag, ordering),
        "reversed_edge_count": reversed_edge_count(w.dag, ordering),
    }))
    return 0


def _benchmark_cell(cell: dict, cell_idx: int, base_seed: int, timings: bool, where: str) -> list[dict]:
    replicates = int(cell.get("replicates", 1))
    p = int(_require(cell, "p", where))
    if "n" in cell:
        n = int(cell["n"])
    elif "n_mult" in cell:
        n = max(2, int(round(float(cell["n_mult"]) * p)))
    else:
        raise UsageError(f"{where}: need 'n' or 'n_mult'")
    family = family_from_doc(_require(cell, "family", where), where)
    mode = cell.get("mode", "fast")
    scheme = cell.get("neighborhoods", "mb")
    if scheme.startswith("corr:"):
        parts = scheme.split(":")
        if len(parts) != 3:
            raise UsageError(f"{where}: expected corr:m:frac (split seed is derived)")
        corr_m, corr_frac = int(parts[1]), float(parts[2])
    elif scheme not in ("mb", "full"):
        raise UsageError(f"{where}: unknown neighborhood scheme {scheme!r}")
    graph_doc = cell.get("graph", {"scheme": "large-sparse"})
    if graph_doc.get("scheme", "large-sparse") != "large-sparse":
        raise UsageError(f"{where}: benchmark cells support only the large-sparse scheme")
    records: list[dict] = []
    for r in range(replicates):
        seed = derive_seed(base_seed, STREAM_REPLICATE, cell_idx, r)
        record = {
            "cell": cell_idx, "replicate": r, "seed": seed, "p": p, "n": n,
            "family": str(family), "mode": mode, "neighborhoods": scheme,
            "order_error": None, "is_topological": None, "update_count": None,
            "wall_time_ms": None, "error": None,
        }
        try:
            cfg = SimConfig(
                p=p, n=n, seed=seed, family=family,
                graph=LargeSparse(
                    root_frac=float(graph_doc.get("root_frac", 0.05)),
                    min_parents=int(graph_doc.get("min_parents", 1)),
                    max_parents=int(graph_doc.get("max_parents", 2)),
                ),
                coef_low=float(cell.get("coef_low", 0.4)),
                coef_high=float(cell.get("coef_high", 0.9)),
                scale_low=float(cell.get("scale_low", 0.4)),
                scale_high=float(cell.get("scale_high", 0.7)),
            )
            w, _, x = sample_dataset(cfg)
            if scheme == "mb":
                nbhd, rows = markov_blankets(w.dag), x
            elif scheme == "full":
                nbhd, rows = full_neighborhoods(p), x
            else:
                hold, rows = _split_rows(x, corr_frac, derive_seed(seed, STREAM_SPLIT))
                nbhd = top_correlated(hold, corr_m)
            sort_cfg = SortConfig(family=family, neighborhoods=nbhd, mode=mode)
            result = run_sort(rows, sort_cfg)
            record["order_error"] = order_error(w.dag, result.ordering)
            record["is_topological"] = is_topological(w.dag, result.ordering)
            record["update_count"] = result.update_count
            if timings:
                record["wall_time_ms"] = result.wall_time * 1e3
        except Exception as exc:  # per-replicate failure: record and continue
            record["error"] = f"{type(exc).__name__}: {exc}"
        records.append(record)
    return records


def cmd_benchmark(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        raise UsageError(f"config file not found: {config_path}")
    doc = _read_json(config_path)
    base_seed = int(_require(doc, "base_seed", str(config_path)))
    cells = _require(doc, "cells", str(config_path))
    records: list[dict] = []
    for ci, cell in enumerate(cells):
        records.extend(_benchmark_cell(cell, ci, base_seed, args.timings,
                                       where=f"{config_path}: cells[{ci}]"))
    records.sort(key=lambda rec: (rec["cell"], rec["replicate"]))
    tmp = Path(str(args.out) + ".tmp")
    with open(tmp, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    os.replace(tmp, args.out)
    print(json.dumps({"results": str(args.out), "records": len(records)}))
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    x = read_data_csv(args.data)
    ordering = read_ordering(args.ordering)
    if ordering.p != x.p:
        raise UsageError(f"ordering has {ordering.p} nodes, data has {x.p}")
    family = family_from_doc(args.family, "--family")
    nbhd, rows, _ = resolve_neighborhoods(args.neighborhoods, x)
    mean, sd = column_moments(rows.values)
    if np.any(sd == 0):
        raise UsageError("training data has a constant column")
    train = standardize(rows)
    b_hat, scales = fit_coefficients(train, ordering, nbhd, family)
    nz = np.nonzero(b_hat)
    doc = {
        "p": x.p,
        "family": family_to_doc(family),
        "coefficients": [
            {"from": int(j), "to": int(k), "weight": float(b_hat[j, k])}
            for j, k in zip(*nz)
        ],
        "scales": [float(s) for s in scales],
        "train_means": [float(v) for v in mean],
        "train_sds": [float(v) for v in sd],
    }
    _write_json(args.out, doc)
    print(json.dumps({"model": str(args.out), "nonzero_coefficients": int(nz[0].size)}))
    return 0


def read_model(path: str | Path) -> tuple[np.ndarray, np.ndarray, NoiseFamily, np.ndarray, np.ndarray]:
    doc = _read_json(path)
    try:
        p = int(doc["p"])
        family = family_from_doc(doc["family"], str(path))
        b_hat = np.zeros((p, p))
        for e in doc["coefficients"]:
            b_hat[int(e["from"]), int(e["to"])] = float(e["weight"])
        scales = np.asarray(doc["scales"], dtype=float)
        mean = np.asarray(doc["train_means"], dtype=float)
        sd = np.asarray(doc["train_sds"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path}: missing or malformed field ({exc})") from None
    return b_hat, scales, family, mean, sd


def cmd_loglik(args: argparse.Namespace) -> int:
    b_hat, scales, family, mean, sd = read_model(args.model)
    x = read_data_csv(args.data)
    if x.p != b_hat.shape[0]:
        raise UsageError(f"model has {b_hat.shape[0]} nodes, data has {x.p}")
    test = apply_moments(x, mean, sd)
    value = heldout_loglik(test, b_hat, scales, family)
    print(json.dumps({"mean_loglik": value, "units": "per-observation-per-variable",
                      "family": str(family)}))
    return 0


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lingamsort",
        description="Topological ordering of linear non-Gaussian acyclic models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="sample a synthetic model and data set")
    gen.add_argument("--config", required=True, help="JSON simulation config")
    gen.add_argument("--out-data", default="data.csv")
    gen.add_argument("--out-truth", default="truth.json")
    gen.set_defaults(func=cmd_generate)

    srt = sub.add_parser("sort", help="estimate a topological ordering")
    srt.add_argument("--data", required=True, help="CSV data matrix")
    srt.add_argument("--family", default="laplace",
                     help="laplace | logistic | scaled-t:NU")
    srt.add_argument("--mode", choices=["fast", "exact"], default="fast")
    srt.add_argument("--neighborhoods", default="full",
                     help="full | FILE.json | corr:m:frac:seed")
    srt.add_argument("--trace", action="store_true", help="record per-step scores")
    srt.add_argument("--timings", action="store_true",
                     help="emit measured wall time (breaks byte-stability)")
    srt.add_argument("--restrict-updates", action="store_true",
                     help="experimental: limit partial updates to each target's neighborhood")
    srt.add_argument("--out", default="ordering.json")
    srt.set_defaults(func=cmd_sort)

    ev = sub.add_parser("eval", help="score an ordering against the truth")
    ev.add_argument("--truth", required=True)
    ev.add_argument("--ordering", required=True)
    ev.set_defaults(func=cmd_eval)

    bench = sub.add_parser("benchmark", help="run a generate/sort/eval grid")
    bench.add_argument("--config", required=True, help="JSON benchmark grid")
    bench.add_argument("--out", default="results.jsonl")
    bench.add_argument("--timings", action="store_true")
    bench.set_defaults(func=cmd_benchmark)

    fit = sub.add_parser("fit", help="fit coefficients and scales along an ordering")
    fit.add_argument("--data", required=True)
    fit.add_argument("--ordering", required=True)
    fit.add_argument("--family", default="laplace",
                     help="laplace | logistic | scaled-t:NU | gaussian (evaluation only)")
    fit.add_argument("--neighborhoods", default="full")
    fit.add_argument("--out", default="model.json")
    fit.set_defaults(func=cmd_fit)

    ll = sub.add_parser("loglik", help="held-out mean log-likelihood of a model")
    ll.add_argument("--model", required=True)
    ll.add_argument("--data", required=True, help="test CSV, raw (training transform is applied)")
    ll.set_defaults(func=cmd_loglik)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
