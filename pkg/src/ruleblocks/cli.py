"""Command-line driver: run a rule set over documents and write a
traffic-light report.

Exit codes: 0 no red events, 1 at least one red event, 2 usage or load error
(including an input document that cannot be loaded).
"""

from __future__ import annotations

import argparse
import hashlib
import importlib
import importlib.util
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from types import ModuleType
from typing import Sequence

from . import __version__, xmlout
from .context import RED, EngineConfig, ExtractionContext, worst
from .docmodel import load_document
from .engine import run
from .errors import RuleBlocksError
from .rulemodel import Registry, RuleSet, default_registry, load_ruleset_file

TOOL_NAME = "ruleblocks"

EXIT_OK = 0
EXIT_RED = 1
EXIT_USAGE = 2


@dataclass
class DocumentReport:
    input: str
    digest: str
    events: list[dict] = field(default_factory=list)
    blocks: dict[str, int] = field(default_factory=dict)
    rules: dict[str, int] = field(default_factory=dict)
    output: str | None = None
    loaded: bool = True

    @property
    def status(self) -> str:
        return worst(e["severity"] for e in self.events)

    def to_dict(self) -> dict:
        return {
            "input": self.input,
            "digest": self.digest,
            "status": self.status,
            "output": self.output,
            "blocks": dict(sorted(self.blocks.items())),
            "rules": dict(sorted(self.rules.items())),
            "events": self.events,
        }


@dataclass
class Report:
    documents: list[DocumentReport] = field(default_factory=list)
    ruleset_warnings: list[str] = field(default_factory=list)

    @property
    def status(self) -> str:
        statuses = [d.status for d in self.documents]
        if self.ruleset_warnings:
            statuses.append("yellow")
        return worst(statuses)

    def to_dict(self) -> dict:
        return {
            "tool": {"name": TOOL_NAME, "version": __version__},
            "status": self.status,
            "ruleset_warnings": list(self.ruleset_warnings),
            "documents": [d.to_dict() for d in self.documents],
        }


_MARKERS = {"green": "[ OK ]", "yellow": "[WARN]", "red": "[FAIL]"}


def render_report(report: Report | dict, format: str = "json") -> bytes:
    data = report.to_dict() if isinstance(report, Report) else report
    if format == "json":
        return (json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n").encode("utf-8")
    if format != "text":
        raise ValueError(f"unknown report format {format!r}")
    lines = [f"{TOOL_NAME} {data['tool']['version']}  overall: {data['status'].upper()}"]
    for warning in data.get("ruleset_warnings", []):
        lines.append(f"{_MARKERS['yellow']} ruleset: {warning}")
    for doc in data["documents"]:
        lines.append(f"{_MARKERS[doc['status']]} {doc['input']} ({doc['status']})")
        for ev in doc["events"]:
            where = ", ".join(
                f"{k}={ev[k]}" for k in ("ruleset", "block_type", "rule", "location") if ev.get(k)
            )
            lines.append(f"  {_MARKERS[ev['severity']]} {ev['code']}: {ev['message']}"
                         + (f" ({where})" if where else ""))
    return ("\n".join(lines) + "\n").encode("utf-8")


def exit_code(report: Report) -> int:
    if not all(d.loaded for d in report.documents):
        return EXIT_USAGE
    return EXIT_RED if report.status == RED else EXIT_OK


# ---------------------------------------------------------------------------
# plugins


def load_plugin(spec: str) -> ModuleType:
    """Import a plugin by module name or from a ``.py`` file path."""
    if spec.endswith(".py"):
        path = Path(spec)
        mod_spec = importlib.util.spec_from_file_location(path.stem, path)
        if mod_spec is None or mod_spec.loader is None:
            raise ImportError(f"cannot load plugin file {spec}")
        module = importlib.util.module_from_spec(mod_spec)
        mod_spec.loader.exec_module(module)
        return module
    return importlib.import_module(spec)


@dataclass
class Backend:
    new_user_object: object = lambda: xmlout.new_cursor("output")
    serialize: object = xmlout.serialize


def _backend(plugins: Sequence[ModuleType]) -> Backend:
    backend = Backend()
    for plugin in plugins:
        if hasattr(plugin, "new_user_object"):
            backend.new_user_object = plugin.new_user_object
        if hasattr(plugin, "serialize"):
            backend.serialize = plugin.serialize
    return backend


def _output_path(base: Path, index: int, total: int) -> Path:
    if total == 1:
        return base
    return base.with_name(f"{base.stem}-{index}{base.suffix}")


# ---------------------------------------------------------------------------
# main


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog=TOOL_NAME, description=__doc__.split("\n\n")[0].replace("\n", " "),
                                epilog=__doc__.split("\n\n")[1].replace("\n", " "))
    p.add_argument("--ruleset", help="rule-set XML file (default: the plugin's own, if any)")
    p.add_argument("--input", nargs="+", required=True, help="input documents")
    p.add_argument("--output", help="output XML path; -N suffixes for multiple inputs")
    p.add_argument("--report", help="report path (default: standard output)")
    p.add_argument("--report-format", choices=("json", "text"), default="json")
    p.add_argument("--format", choices=("auto", "xml", "container"), default="auto",
                   help="input format override")
    p.add_argument("--paragraph-elements",
                   help="comma-separated element names treated as paragraphs")
    p.add_argument("--plugin", action="append", default=[],
                   help="module or .py file providing register(registry)")
    p.add_argument("--parallel", action="store_true", help="process inputs concurrently")
    p.add_argument("--trace", action="store_true", help="log trace output to stderr")
    p.add_argument("--version", action="version", version=f"{TOOL_NAME} {__version__}")
    return p


def _process(
    index: int,
    path: str,
    ruleset: RuleSet,
    args: argparse.Namespace,
    config: EngineConfig,
    backend: Backend,
    total: int,
) -> DocumentReport:
    data = Path(path).read_bytes()
    doc_report = DocumentReport(input=path, digest="sha256:" + hashlib.sha256(data).hexdigest())
    try:
        tree = load_document(data, args.format)
    except RuleBlocksError as exc:
        doc_report.events.append({
            "severity": RED, "code": "load-failed", "message": str(exc),
            "ruleset": None, "block_type": None, "rule": "<loader>", "location": None,
        })
        doc_report.loaded = False
        return doc_report
    ctx = ExtractionContext(config)
    user_object, events = run(ruleset, tree, backend.new_user_object(), context=ctx)
    doc_report.events = [e.to_dict() for e in events]
    doc_report.blocks = dict(ctx.block_counts)
    doc_report.rules = dict(ctx.rule_counts)
    if args.output:
        out = _output_path(Path(args.output), index, total)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_bytes(backend.serialize(user_object))
        doc_report.output = str(out)
    return doc_report


def main(argv: Sequence[str] | None = None, *, registry: Registry | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.trace:
        logging.basicConfig(
            level=logging.INFO, stream=sys.stderr,
            format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        )

    try:
        plugins = [load_plugin(s) for s in args.plugin]
    except Exception as exc:  # noqa: BLE001
        print(f"{TOOL_NAME}: cannot load plugin: {exc}", file=sys.stderr)
        return EXIT_USAGE

    registry = registry or default_registry()
    ruleset_path = args.ruleset
    try:
        for plugin in plugins:
            if hasattr(plugin, "register"):
                plugin.register(registry)
            if ruleset_path is None and hasattr(plugin, "default_ruleset"):
                ruleset_path = plugin.default_ruleset()
        if ruleset_path is None:
            print(f"{TOOL_NAME}: --ruleset is required", file=sys.stderr)
            return EXIT_USAGE
        ruleset = load_ruleset_file(ruleset_path, registry)
    except (RuleBlocksError, OSError) as exc:
        print(f"{TOOL_NAME}: {exc}", file=sys.stderr)
        return EXIT_USAGE

    missing = [p for p in args.input if not Path(p).is_file()]
    if missing:
        print(f"{TOOL_NAME}: input not found: {', '.join(missing)}", file=sys.stderr)
        return EXIT_USAGE

    paragraphs = None
    if args.paragraph_elements:
        paragraphs = frozenset(x.strip() for x in args.paragraph_elements.split(",") if x.strip())
    output_dir = Path(args.output).parent if args.output else None
    config = EngineConfig(
        **({"paragraph_elements": paragraphs} if paragraphs else {}),
        output_dir=output_dir,
        trace=args.trace,
    )
    backend = _backend(plugins)
    total = len(args.input)
    jobs = [(i, p) for i, p in enumerate(args.input, start=1)]

    def work(job):
        return _process(job[0], job[1], ruleset, args, config, backend, total)

    if args.parallel and total > 1:
        with ThreadPoolExecutor() as pool:
            docs = list(pool.map(work, jobs))
    else:
        docs = [work(job) for job in jobs]

    report = Report(docs, list(ruleset.warnings))
    rendered = render_report(report, args.report_format)
    if args.report:
        Path(args.report).parent.mkdir(parents=True, exist_ok=True)
        Path(args.report).write_bytes(rendered)
    else:
        sys.stdout.write(rendered.decode("utf-8"))
    return exit_code(report)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
