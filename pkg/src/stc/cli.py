"""``stc`` command line: generate, encode, cluster, edit, match, query, evaluate, benchmark."""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bench import GenConfig, bench, gen_domain_space, gen_services, parse_sizes, write_bench_csv
from .cluster import ABSTRACTION_MODES, converge
from .discovery import discover, load_queries
from .errors import STCError
from .evaluation import Dataset, evaluate, load_dataset, load_relevance, write_plotdata, write_report
from .matchmaker import g_subsumption
from .ontology import DomainSpace, load_ontology
from .service import FEATURES, load_services
from .store import Workspace, load_workspace


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


class _Run:
    """Collects what a run read and wrote, for its manifest."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs: list[Path] = []
        self.generations: dict[str, int] = {}
        self.seeds: dict[str, int] = {}
        self.timings: dict[str, float] = {}
        self.t0 = time.perf_counter()

    def say(self, text: str) -> None:
        if not self.args.quiet:
            print(text)

    def read(self, path) -> Path:
        p = Path(path)
        self.inputs.append(p)
        return p

    def note_domain(self, domain: DomainSpace) -> None:
        self.generations["domain"] = domain.generation
        for o in domain.ontologies:
            self.generations[o.name] = o.generation

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(self.argv[1:] if self.argv else [], sort_keys=True).encode())
        for p in self.inputs:
            files = sorted(p.rglob("*")) if p.is_dir() else [p]
            for f in files:
                if f.is_file():
                    h.update(f.name.encode())
                    h.update(f.read_bytes())
        return h.hexdigest()

    def manifest(self, artifact) -> None:
        artifact = Path(artifact)
        target = (artifact / "manifest.json") if artifact.is_dir() else artifact.with_name(artifact.name + ".manifest.json")
        doc = {
            "command": self.args.command,
            "argv": self.argv,
            "config_digest": self.digest(),
            "seeds": self.seeds,
            "generations": self.generations,
            "versions": {"stc": __version__, "python": platform.python_version(), "numpy": np.__version__},
            "timings": {**self.timings, "wall_s": round(time.perf_counter() - self.t0, 6)},
        }
        target.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8", newline="\n")


def _write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=1, sort_keys=True) + "\n", encoding="utf-8", newline="\n")


def _domain_from(run: _Run, sources) -> DomainSpace:
    docs = []
    for src in sources:
        p = run.read(src)
        if p.is_dir():
            docs.extend(sorted(p.glob("*.json")))
        else:
            docs.append(p)
    if not docs:
        raise UsageError("no ontology documents given")
    domain = DomainSpace.from_documents(docs)
    run.note_domain(domain)
    return domain


def _features(choice: str) -> tuple[str, ...]:
    return FEATURES if choice == "both" else (choice,)


def _config(run: _Run) -> GenConfig:
    args = run.args
    cfg = GenConfig.from_file(run.read(args.config)) if getattr(args, "config", None) else GenConfig()
    if args.seed is not None:
        cfg.rng_seed = args.seed
    run.seeds["rng_seed"] = cfg.rng_seed
    return cfg


# -- subcommands -------------------------------------------------------------


def cmd_gen(run: _Run) -> None:
    args = run.args
    cfg = _config(run)
    if args.services is not None:
        cfg.service_count = args.services
    out = Path(args.out)
    (out / "ontologies").mkdir(parents=True, exist_ok=True)
    docs = gen_domain_space(cfg)
    for d in docs:
        _write_json(out / "ontologies" / f"{d['name']}.json", d)
    services = gen_services(cfg, docs)
    _write_json(out / "services.json", services)
    (out / "config.txt").write_text(cfg.to_text(), encoding="utf-8", newline="\n")
    run.note_domain(DomainSpace.from_documents(docs))
    run.manifest(out)
    run.say(f"wrote {len(docs)} ontologies and {len(services)} services to {out}")


def cmd_encode(run: _Run) -> None:
    args = run.args
    onto = load_ontology(run.read(args.ontology))
    run.generations[onto.name] = onto.generation
    if args.dump_codes:
        Path(args.dump_codes).write_text(onto.dump_codes(), encoding="utf-8", newline="\n")
        run.manifest(args.dump_codes)
        run.say(f"{onto.name}: {len(onto)} concepts, width {onto.width}, codes in {args.dump_codes}")
    else:
        sys.stdout.write(onto.dump_codes())


def cmd_cluster(run: _Run) -> None:
    args = run.args
    domain = _domain_from(run, args.ontologies)
    services = load_services(run.read(args.services), domain)
    if args.seed is not None:
        run.seeds["shuffle"] = args.seed
    i_space, o_space = converge(services, shuffle=args.seed is not None, seed=args.seed,
                                generation=domain.generation, abstraction=args.abstraction)
    spaces = {"I": i_space, "O": o_space}
    ws = Workspace(domain, {s.id: s for s in services}, {f: spaces[f] for f in _features(args.feature)})
    ws.save(args.out)
    run.manifest(args.out)
    for f, sp in sorted(ws.spaces.items()):
        run.say(f"{f}-space: {len(sp)} nodes, {len(sp.roots)} roots, {sp.comparisons} comparisons")


def cmd_insert(run: _Run) -> None:
    args = run.args
    ws = load_workspace(run.read(args.space))
    run.note_domain(ws.domain)
    new = load_services(run.read(args.service), ws.domain)
    for s in new:
        if s.id in ws.services:
            raise UsageError(f"service {s.id!r} already registered")
    for s in new:
        ws.services[s.id] = s
        for f, sp in sorted(ws.spaces.items()):
            placed = sp.insert(s)
            run.say(f"{s.id} -> {f} node {placed.node_id} ({'merged' if placed.exact else 'new'}, "
                    f"{placed.comparisons} comparisons)")
    out = args.out or args.space
    ws.save(out)
    run.manifest(out)


def cmd_remove(run: _Run) -> None:
    args = run.args
    ws = load_workspace(run.read(args.space))
    run.note_domain(ws.domain)
    for sid in args.id:
        if sid not in ws.services:
            raise UsageError(f"unknown service {sid!r}")
        for sp in ws.spaces.values():
            sp.remove(sid)
        del ws.services[sid]
        run.say(f"removed {sid}")
    out = args.out or args.space
    ws.save(out)
    run.manifest(out)


def cmd_match(run: _Run) -> None:
    args = run.args
    if args.space:
        ws = load_workspace(run.read(args.space))
        services = ws.services
    else:
        if not args.services or not args.ontologies:
            raise UsageError("match needs --space, or --services with --ontologies")
        domain = _domain_from(run, args.ontologies)
        services = {s.id: s for s in load_services(run.read(args.services), domain)}
    a, b = args.pair
    for sid in (a, b):
        if sid not in services:
            raise UsageError(f"unknown service {sid!r}")
    res = g_subsumption(services[a].gcode(args.feature), services[b].gcode(args.feature))
    parent = res.abstract_parent.code.hex() if res.abstract_parent is not None else ""
    print(f"{res.strength.name},{parent}")


def cmd_query(run: _Run) -> None:
    args = run.args
    ws = load_workspace(run.read(args.space))
    run.note_domain(ws.domain)
    queries = load_queries(run.read(args.query), ws.domain)
    lines = ["query_id,rank,service_id,strength,phase1_rank"]
    for q in queries:
        res = discover(q, ws.space("O"), ws.space("I"), ws.services, ws.domain,
                       include_siblings=not args.no_siblings)
        phase1 = {h.service_id: h.rank for h in res.candidates}
        for h in res.hits:
            lines.append(f"{q.id},{h.rank},{h.service_id},{h.strength.name},{phase1[h.service_id]}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        run.manifest(args.out)
    else:
        sys.stdout.write(text)


def cmd_eval(run: _Run) -> None:
    args = run.args
    if args.dataset:
        data = load_dataset(run.read(args.dataset))
        spaces = None
    else:
        if not (args.spaces and args.queries):
            raise UsageError("eval needs --dataset, or --spaces with --queries")
        ws = load_workspace(run.read(args.spaces))
        data = Dataset(ws.domain, [ws.services[k] for k in sorted(ws.services)],
                       load_queries(run.read(args.queries), ws.domain), {})
        spaces = (ws.space("I"), ws.space("O"))
    if args.queries and args.dataset:
        data.queries = load_queries(run.read(args.queries), data.domain)
    if args.relevance:
        data.relevance = load_relevance(run.read(args.relevance))
    run.note_domain(data.domain)
    report = evaluate(data, spaces=spaces, include_siblings=not args.no_siblings)
    run.timings.update({k: round(v, 6) for k, v in report.timings.items()})
    write_report(report, args.report)
    run.manifest(args.report)
    _write_json(Path(args.report).with_suffix(".summary.json"), report.summary())
    if args.emit_plotdata:
        write_plotdata(report, args.emit_plotdata)
        run.manifest(args.emit_plotdata)
    s = report.summary()
    run.say(f"{s['queries']} queries, F-measure phase1 {s['f_measure'].get('phase1', 0):.4f} "
            f"phase2 {s['f_measure'].get('phase2', 0):.4f}")
    if report.excluded:
        run.say(f"excluded (no relevant services): {', '.join(report.excluded)}")


def cmd_bench(run: _Run) -> None:
    args = run.args
    cfg = _config(run)
    records = bench(parse_sizes(args.sizes), cfg, baseline_threshold=args.threshold,
                    baseline_max=args.baseline_max, abstraction=args.abstraction)
    write_bench_csv(records, args.report)
    run.manifest(args.report)
    for r in records:
        run.say(f"{r.size:5d} services: {r.stc_seconds:.3f} s, comparisons/space size "
                f"I {r.i_fraction:.3f} O {r.o_fraction:.3f}")


def cmd_export_dot(run: _Run) -> None:
    args = run.args
    ws = load_workspace(run.read(args.space))
    text = ws.space(args.feature).to_dot()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
        run.manifest(args.out)
    else:
        sys.stdout.write(text)


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(add_help=False)
    top.add_argument("--seed", type=int, default=None,
                     help="random seed (gen/bench: generator seed; cluster: shuffle the batch)")
    top.add_argument("--quiet", action="store_true", default=False, help="no progress output")
    # the same flags after the subcommand; SUPPRESS keeps them from
    # overwriting values given before it
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)

    p = _Parser(prog="stc", description="Stratified taxonomical clustering of semantic web services.",
                parents=[top])
    p.add_argument("--version", action="version", version=f"stc {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(func=func)
        return sp

    sp = add("gen", cmd_gen, "generate synthetic ontologies and services")
    sp.add_argument("--config", help="flat key = value generator config")
    sp.add_argument("--services", type=int, help="override service_count")
    sp.add_argument("--out", required=True, help="output directory")

    sp = add("encode", cmd_encode, "encode one ontology and dump its codes")
    sp.add_argument("--ontology", required=True)
    sp.add_argument("--dump-codes", help="CSV output (stdout if omitted)")

    sp = add("cluster", cmd_cluster, "build cluster spaces from a service batch")
    sp.add_argument("--services", required=True)
    sp.add_argument("--ontologies", nargs="+", required=True, help="ontology files or directories")
    sp.add_argument("--feature", choices=[*FEATURES, "both"], default="both")
    sp.add_argument("--abstraction", choices=ABSTRACTION_MODES, default="rootless")
    sp.add_argument("--out", required=True, help="space file")

    sp = add("insert", cmd_insert, "insert services into a space file")
    sp.add_argument("--space", required=True)
    sp.add_argument("--service", required=True, help="service document or list")
    sp.add_argument("--out", help="write here instead of updating --space")

    sp = add("remove", cmd_remove, "remove services from a space file")
    sp.add_argument("--space", required=True)
    sp.add_argument("--id", nargs="+", required=True)
    sp.add_argument("--out", help="write here instead of updating --space")

    sp = add("match", cmd_match, "classify a pair of services")
    sp.add_argument("--space")
    sp.add_argument("--services")
    sp.add_argument("--ontologies", nargs="+")
    sp.add_argument("--pair", nargs=2, required=True, metavar=("ID1", "ID2"))
    sp.add_argument("--feature", choices=FEATURES, default="O")

    sp = add("query", cmd_query, "two-phase discovery")
    sp.add_argument("--space", required=True)
    sp.add_argument("--query", required=True)
    sp.add_argument("--out")
    sp.add_argument("--no-siblings", action="store_true", help="drop sibling-strength candidates")

    sp = add("eval", cmd_eval, "evaluate retrieval and clustering accuracy")
    sp.add_argument("--spaces")
    sp.add_argument("--dataset", help="directory with ontologies/, services.json, queries.json, relevance.json")
    sp.add_argument("--queries")
    sp.add_argument("--relevance")
    sp.add_argument("--report", required=True)
    sp.add_argument("--emit-plotdata", metavar="DIR")
    sp.add_argument("--no-siblings", action="store_true")

    sp = add("bench", cmd_bench, "runtime and comparison-count sweep")
    sp.add_argument("--sizes", default="50:1500:100", help="start:stop:step or a comma list")
    sp.add_argument("--config")
    sp.add_argument("--threshold", type=float, default=0.5, help="baseline distance threshold")
    sp.add_argument("--baseline-max", type=int, default=850, help="largest size the baseline runs on")
    sp.add_argument("--abstraction", choices=ABSTRACTION_MODES, default="rootless")
    sp.add_argument("--report", required=True)

    sp = add("export-dot", cmd_export_dot, "Graphviz rendering of one space")
    sp.add_argument("--space", required=True)
    sp.add_argument("--feature", choices=FEATURES, default="O")
    sp.add_argument("--out")
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    run = _Run(args, ["stc", *argv])
    try:
        args.func(run)
    except (UsageError, STCError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"stc {args.command}: error: {msg}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"stc {args.command}: internal error: {exc!r}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
