"""Command line entry point.

Exit codes:
    0  success; for ``distinguish``, the pair was distinguished
    1  input/output or dataset error (missing files, malformed data, empty dataset)
    2  invalid flags (usage is printed)
    3  ``distinguish`` ran to completion without distinguishing the pair
    4  dense k-WL would exceed the memory budget (``SPEQWL_MEM_BUDGET_BYTES``)

Algorithm ids on the command line map to library names as follows:
    ks-lwl -> ks_lwl, ks-lwl-plus -> ks_lwl_plus, delta-k-lwl -> delta_k_lwl,
    delta-k-lwl-plus -> delta_k_lwl_plus, k-wl -> k_wl_oblivious,
    k-fwl -> k_wl_folklore, 1-wl -> one_wl,
    edge-labeled-1-wl -> edge_labeled_one_wl
"""

from __future__ import annotations

import argparse
import csv
import json
import statistics
import sys
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import families
from ._validation import check_n_jobs
from .dense import MemoryBudgetError
from .graph import GraphCollection
from .io import TUDatasetConsistencyError, TUDatasetFormatError, load_tudataset, write_tudataset
from .kernels import build_refiners, feature_maps, gram_from_features, refine_collection, write_gram
from .refinement import ALGORITHM_ALIASES, UNTIL_STABLE, RefinementConfig, distinguish, histogram_text

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_NOT_DISTINGUISHED = 3
EXIT_MEMORY = 4

CLI_ALGORITHMS = dict(ALGORITHM_ALIASES)

FAMILIES = ("cycle", "cycle-pair", "ab-pair", "cfi", "padded-colored")


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    argv: list[str]
    flags: dict
    inputs: list[str]
    outputs: list[str] = field(default_factory=list)
    seed: int = 0
    timings: dict[str, float] = field(default_factory=dict)

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + time.perf_counter() - start

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _iterations(text: str):
    if text in ("stable", UNTIL_STABLE):
        return UNTIL_STABLE
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer or 'stable', got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("iterations must be non-negative")
    return value


def _add_algorithm_flags(p: argparse.ArgumentParser, default_algorithm: str = "ks-lwl") -> None:
    p.add_argument("--algorithm", choices=sorted(CLI_ALGORITHMS), default=default_algorithm)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--s", type=int, default=None)
    p.add_argument("--iterations", type=_iterations, default=5, help="integer or 'stable'")
    group = p.add_mutually_exclusive_group()
    group.add_argument(
        "--plus-last-only",
        dest="plus_last_only",
        action="store_true",
        default=True,
        help="plus variants count neighbors only in the last round (default)",
    )
    group.add_argument("--plus-every-round", dest="plus_last_only", action="store_false")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest; refinement is deterministic")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: available cores)")
    p.add_argument("--manifest", default=None, help="manifest path (default: next to the outputs)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speqwl", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("refine", help="write per-graph, per-round color histograms")
    p.add_argument("--input", required=True, help="TUDataset directory")
    p.add_argument("--name", default=None, help="dataset name (default: inferred from *_A.txt)")
    p.add_argument("--output", required=True, help="output directory")
    _add_algorithm_flags(p)
    _add_common(p)

    p = sub.add_parser("distinguish", help="test whether an algorithm tells two graphs apart")
    p.add_argument(
        "inputs",
        nargs="+",
        help="one TUDataset directory holding exactly two graphs, or two directories (first graph of each)",
    )
    p.add_argument("--output", default=None, help="also write the result line to this file")
    _add_algorithm_flags(p)
    _add_common(p)

    for name, default_format in (("gram", "csv"), ("kernel", "features")):
        p = sub.add_parser(name, help="Gram matrix or explicit feature vectors of a dataset")
        p.add_argument("--input", required=True)
        p.add_argument("--name", default=None)
        p.add_argument("--output", required=True, help="output file")
        p.add_argument("--format", choices=("csv", "libsvm", "features"), default=default_format)
        p.add_argument("--normalize", choices=("cosine", "none"), default="cosine")
        _add_algorithm_flags(p)
        _add_common(p)

    p = sub.add_parser("family", help="write a generated graph family in TUDataset format")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=8, help="cycle length for 'cycle'")
    p.add_argument("--delta", type=int, default=None, help="path length for 'padded-colored' (default 3k+1)")
    p.add_argument("--output", required=True, help="output directory")
    p.add_argument("--name", default=None, help="dataset name (default: family name)")
    _add_common(p)

    p = sub.add_parser("bench", help="time preprocessing and refinement per algorithm")
    p.add_argument("--input", required=True, help="TUDataset directory")
    p.add_argument("--name", default=None)
    p.add_argument(
        "--algorithms",
        required=True,
        help="comma-separated name:k[:s] items, e.g. ks-lwl:2:1,delta-k-lwl:2",
    )
    p.add_argument("--iterations", type=_iterations, default=5)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--output", default=None, help="CSV path (default: stdout)")
    _add_common(p)
    return parser


def _config(args, algorithm: str | None = None, k: int | None = None, s: int | None = None) -> RefinementConfig:
    try:
        return RefinementConfig(
            CLI_ALGORITHMS[algorithm or args.algorithm],
            args.k if k is None else k,
            getattr(args, "s", None) if s is None else s,
            args.iterations,
            getattr(args, "plus_last_only", True),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _dataset_name(directory: Path, name: str | None) -> str:
    if name is not None:
        return name
    if not directory.is_dir():
        raise DataError(f"{directory} is not a directory")
    found = sorted(p.name[: -len("_A.txt")] for p in directory.glob("*_A.txt"))
    if len(found) != 1:
        raise DataError(f"cannot infer the dataset name in {directory}: found {found or 'no *_A.txt file'}")
    return found[0]


def _load(directory: str, name: str | None) -> GraphCollection:
    path = Path(directory)
    collection = load_tudataset(path, _dataset_name(path, name))
    if len(collection) == 0:
        raise DataError(f"{directory} holds no graphs")
    return collection


def _flags(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "handler"}


def _manifest_path(args, default: Path) -> Path:
    return Path(args.manifest) if args.manifest else default


def cmd_refine(args, manifest: RunManifest) -> int:
    config = _config(args)
    with manifest.phase("load"):
        collection = _load(args.input, args.name)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    with manifest.phase("preprocessing"):
        refiners = build_refiners(collection.graphs, config, args.jobs)
    with manifest.phase("refinement"):
        histories = refine_collection(collection.graphs, config, refiners=refiners)
    width = len(str(max(len(histories) - 1, 0)))
    with manifest.phase("write"):
        for i, history in enumerate(histories):
            target = out / f"graph_{i:0{width}d}.hist"
            target.write_text(histogram_text(history))
            manifest.outputs.append(str(target))
    manifest.write(_manifest_path(args, out / "manifest.json"))
    return EXIT_OK


def _pair(inputs: Sequence[str]):
    if len(inputs) == 1:
        collection = _load(inputs[0], None)
        if len(collection) != 2:
            raise DataError(f"{inputs[0]} holds {len(collection)} graphs, expected exactly 2")
        return collection[0], collection[1]
    if len(inputs) == 2:
        return _load(inputs[0], None)[0], _load(inputs[1], None)[0]
    raise UsageError("distinguish takes one or two dataset directories")


def cmd_distinguish(args, manifest: RunManifest) -> int:
    config = _config(args)
    with manifest.phase("load"):
        g, h = _pair(args.inputs)
    with manifest.phase("refinement"):
        result = distinguish(g, h, config)
    line = f"distinguished={'true' if result.distinguished else 'false'} round={'-' if result.round is None else result.round}"
    print(line)
    if args.output:
        Path(args.output).write_text(line + "\n")
        manifest.outputs.append(args.output)
    if args.manifest or args.output:
        default = Path(args.output).with_name(Path(args.output).name + ".manifest.json") if args.output else None
        manifest.write(_manifest_path(args, default))
    return EXIT_OK if result.distinguished else EXIT_NOT_DISTINGUISHED


def cmd_gram(args, manifest: RunManifest) -> int:
    config = _config(args)
    with manifest.phase("load"):
        collection = _load(args.input, args.name)
    with manifest.phase("features"):
        features = feature_maps(collection, config, n_jobs=args.jobs)
    out = Path(args.output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "features":
        with manifest.phase("write"):
            out.write_text("".join(f.to_text() + "\n" for f in features))
    else:
        with manifest.phase("gram"):
            gram = gram_from_features(features, args.normalize == "cosine")
        labels = collection.graph_targets if args.format == "libsvm" else None
        with manifest.phase("write"):
            write_gram(gram, out, args.format, labels)
    manifest.outputs.append(str(out))
    manifest.write(_manifest_path(args, out.with_name(out.name + ".manifest.json")))
    return EXIT_OK


def _family(args) -> list:
    k = args.k
    try:
        if args.family == "cycle":
            return [families.cycle(args.n)]
        if args.family == "cycle-pair":
            pair = families.cycle_pair(k)
        elif args.family == "ab-pair":
            pair = families.ab_pair(k)
        elif args.family == "cfi":
            pair = families.cfi_pair(k)
        else:
            delta = 3 * k + 1 if args.delta is None else args.delta
            pair = families.padded_colored_pair(k, delta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return list(pair)


def cmd_family(args, manifest: RunManifest) -> int:
    with manifest.phase("generate"):
        graphs = _family(args)
    name = args.name or args.family.replace("-", "_")
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    targets = list(range(len(graphs))) if len(graphs) > 1 else None
    with manifest.phase("write"):
        write_tudataset(GraphCollection(graphs, targets), out, name)
    for i, g in enumerate(graphs):
        print(f"graph {i}: {g.node_count} nodes, {sum(1 for _ in g.edges())} edges")
    manifest.outputs.extend(str(p) for p in sorted(out.glob(f"{name}_*.txt")))
    manifest.write(_manifest_path(args, out / "manifest.json"))
    return EXIT_OK


def _parse_algorithms(spec: str) -> list[tuple[str, int, int | None]]:
    items = []
    for item in filter(None, (part.strip() for part in spec.split(","))):
        fields = item.split(":")
        if fields[0] not in CLI_ALGORITHMS or not 1 <= len(fields) <= 3:
            raise UsageError(f"bad algorithm item {item!r}; expected name:k[:s] with name in {sorted(CLI_ALGORITHMS)}")
        try:
            k = int(fields[1]) if len(fields) > 1 else 2
            s = int(fields[2]) if len(fields) > 2 else None
        except ValueError:
            raise UsageError(f"bad algorithm item {item!r}") from None
        items.append((fields[0], k, s))
    if not items:
        raise UsageError("--algorithms is empty")
    return items


def cmd_bench(args, manifest: RunManifest) -> int:
    if args.repetitions < 1:
        raise UsageError("--repetitions must be positive")
    items = _parse_algorithms(args.algorithms)
    configs = [_config(args, name, k, s) for name, k, s in items]
    with manifest.phase("load"):
        collection = _load(args.input, args.name)
    dataset = _dataset_name(Path(args.input), args.name)
    rows = []
    for (name, k, _), config in zip(items, configs):
        pre, ref = [], []
        for _ in range(args.repetitions):
            start = time.perf_counter()
            refiners = build_refiners(collection.graphs, config, args.jobs)
            mid = time.perf_counter()
            refine_collection(collection.graphs, config, refiners=refiners)
            end = time.perf_counter()
            pre.append(mid - start)
            ref.append(end - mid)
        p, r = statistics.median(pre), statistics.median(ref)
        label = f"{name}:{config.k}" + (f":{config.s}" if name.startswith("ks") else "")
        rows.append([dataset, label, config.k, config.s, args.repetitions, f"{p:.6f}", f"{r:.6f}", f"{p + r:.6f}"])
        manifest.timings[f"{label}/preprocessing"] = p
        manifest.timings[f"{label}/refinement"] = r
    header = ["dataset", "algorithm", "k", "s", "repetitions", "preprocessing_s", "refinement_s", "total_s"]
    if args.output:
        with open(args.output, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
        manifest.outputs.append(args.output)
        manifest.write(_manifest_path(args, Path(args.output + ".manifest.json")))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(header)
        writer.writerows(rows)
        if args.manifest:
            manifest.write(args.manifest)
    return EXIT_OK


HANDLERS = {
    "refine": cmd_refine,
    "distinguish": cmd_distinguish,
    "gram": cmd_gram,
    "kernel": cmd_gram,
    "family": cmd_family,
    "bench": cmd_bench,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.jobs = check_n_jobs(args.jobs)
    inputs = list(getattr(args, "inputs", None) or ([args.input] if getattr(args, "input", None) else []))
    manifest = RunManifest(args.command, argv, _flags(args), inputs, seed=args.seed)
    try:
        return HANDLERS[args.command](args, manifest)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"speqwl {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MemoryBudgetError as exc:
        print(f"speqwl {args.command}: {exc}", file=sys.stderr)
        return EXIT_MEMORY
    except (DataError, TUDatasetFormatError, TUDatasetConsistencyError, OSError) as exc:
        print(f"speqwl {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
