"""Command-line pipeline: locate, fetch, analyze, report (plus run and check).

The four subcommands mirror the reproducible audit steps: index lookups,
WARC byte-range fetches into a cache, colour extraction and contrast
analysis, and aggregate report rendering. `run` chains all four; `check`
evaluates local inputs ad hoc. Exit codes: 0 success, 1 policy failure
(check found failing contrast), 2 usage or input error, 3 systemic
runtime failure. Logs go to stderr; data files never mix with logs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import ccindex, fetch, pipeline, report as report_mod
from .ccindex import CaptureLocation, IndexClient, IndexUnreachableError, emit_athena_sql
from .colors import RgbaColor, parse_color
from .contrast import assess
from .cssextract import extract_declarations
from .fetch import ArchiveFetcher, FetchError, FetchPolicy
from .pairings import build_pairings

ENV_PREFIX = "CRAWLCONTRAST_"

EXIT_OK = 0
EXIT_POLICY = 1
EXIT_INPUT = 2
EXIT_RUNTIME = 3

LOGGER = logging.getLogger("crawlcontrast")


class InputError(Exception):
    """Bad usage or unreadable input; maps to exit code 2."""


class RuntimeFailure(Exception):
    """Systemic failure (index unreachable, cache unwritable); exit code 3."""


class _DefaultFields(logging.Filter):
    def filter(self, record: logging.LogRecord) -> bool:
        for attr in ("stage", "domain"):
            if not hasattr(record, attr):
                setattr(record, attr, "-")
        return True


def _setup_logging() -> None:
    if LOGGER.handlers:
        return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s\t%(stage)s\t%(domain)s\t%(message)s"))
    handler.addFilter(_DefaultFields())
    LOGGER.addHandler(handler)
    LOGGER.setLevel(logging.INFO)


def _log(level: int, stage: str, message: str, domain: str = "-") -> None:
    LOGGER.log(level, message, extra={"stage": stage, "domain": domain})


@dataclass
class RunConfig:
    crawl_id: str | None = None
    domains_file: str | None = None
    categories_file: str | None = None
    cache_dir: str | None = None
    output_dir: str = "out"
    workers: int = 4
    formats: tuple[str, ...] = ("json", "csv", "markdown")
    offline: bool = False
    index_base_url: str = ccindex.DEFAULT_INDEX_URL
    archive_base_url: str = fetch.DEFAULT_ARCHIVE_URL
    allow_any_subdomain: bool = False
    index_fixtures: str | None = None
    user_agent: str = fetch.DEFAULT_USER_AGENT

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def effective_cache_dir(self) -> Path:
        return Path(self.cache_dir) if self.cache_dir else self.out / "cache"


# (dest, env suffix, config key, converter)
def _str(v):
    return str(v)


def _int(v):
    return int(v)


def _bool(v):
    if isinstance(v, bool):
        return v
    return str(v).strip().lower() in ("1", "true", "yes", "on")


def _formats(v):
    if isinstance(v, (list, tuple)):
        parts = [str(p) for p in v]
    else:
        parts = [p.strip() for p in str(v).split(",") if p.strip()]
    for p in parts:
        if p not in report_mod.FORMATS:
            raise InputError(f"unknown report format {p!r} (choose from {', '.join(report_mod.FORMATS)})")
    return tuple(parts)


_OPTIONS = [
    ("crawl_id", "CRAWL", "crawl", _str),
    ("domains_file", "DOMAINS", "domains", _str),
    ("categories_file", "CATEGORIES", "categories", _str),
    ("cache_dir", "CACHE_DIR", "cache_dir", _str),
    ("output_dir", "OUT", "out", _str),
    ("workers", "WORKERS", "workers", _int),
    ("formats", "FORMATS", "formats", _formats),
    ("offline", "OFFLINE", "offline", _bool),
    ("index_base_url", "INDEX_URL", "index_url", _str),
    ("archive_base_url", "ARCHIVE_URL", "archive_url", _str),
    ("allow_any_subdomain", "ALLOW_ANY_SUBDOMAIN", "allow_any_subdomain", _bool),
    ("index_fixtures", "INDEX_FIXTURES", "index_fixtures", _str),
    ("user_agent", "USER_AGENT", "user_agent", _str),
]


def resolve_config(args: argparse.Namespace, environ=None) -> RunConfig:
    """Merge option sources: CLI flag > env var > config file > default."""
    environ = os.environ if environ is None else environ
    file_values = {}
    config_path = getattr(args, "config", None) or environ.get(ENV_PREFIX + "CONFIG")
    if config_path:
        try:
            file_values = json.loads(Path(config_path).read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config file {config_path}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise InputError(f"config file {config_path} must hold a JSON object")

    config = RunConfig()
    for dest, env_suffix, file_key, convert in _OPTIONS:
        value = getattr(args, dest, None)
        if value is None:
            env_value = environ.get(ENV_PREFIX + env_suffix)
            if env_value is not None:
                value = env_value
            elif file_key in file_values:
                value = file_values[file_key]
        if value is not None:
            try:
                setattr(config, dest, convert(value))
            except (TypeError, ValueError) as exc:
                raise InputError(f"bad value for {file_key}: {value!r}") from exc
    if config.workers < 1:
        raise InputError("workers must be >= 1")
    return config


def _add_common_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--crawl", dest="crawl_id", help="crawl id, e.g. CC-MAIN-2026-08")
    sub.add_argument("--domains", dest="domains_file", help="domain list file, one per line")
    sub.add_argument("--categories", dest="categories_file", help="CSV of domain,category")
    sub.add_argument("--cache-dir", dest="cache_dir", help="record cache directory")
    sub.add_argument("--out", dest="output_dir", help="output directory (default: out)")
    sub.add_argument("--workers", dest="workers", type=int, help="parallel audit workers")
    sub.add_argument("--formats", dest="formats", help="report formats, comma separated")
    sub.add_argument(
        "--offline", dest="offline", action="store_const", const=True, default=None,
        help="forbid all network access (cache and fixtures only)",
    )
    sub.add_argument("--index-url", dest="index_base_url", help="index endpoint base URL")
    sub.add_argument("--archive-url", dest="archive_base_url", help="archive host base URL")
    sub.add_argument(
        "--allow-any-subdomain", dest="allow_any_subdomain",
        action="store_const", const=True, default=None,
        help="accept captures from any subdomain, not just bare/www",
    )
    sub.add_argument(
        "--index-fixtures", dest="index_fixtures",
        help="directory of recorded index responses (<domain>.jsonl) used instead of the network",
    )
    sub.add_argument("--user-agent", dest="user_agent", help="User-Agent for outbound requests")
    sub.add_argument("--config", dest="config", help="JSON config file with default options")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crawlcontrast",
        description="WCAG AA colour-contrast audits of archived pages from Common Crawl",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("locate", "look up homepage captures in the crawl index"),
        ("fetch", "byte-range fetch located records into the cache"),
        ("analyze", "extract colours and assess contrast from cached records"),
        ("report", "aggregate results and render reports"),
        ("run", "locate + fetch + analyze + report in one go"),
    ]:
        _add_common_options(sub.add_parser(name, help=help_text))
    check = sub.add_parser("check", help="check two colours or a local HTML file")
    check.add_argument("targets", nargs="+", help="FG BG colour strings, or one HTML file path")
    return parser


def _read_domains_file(path: str) -> list[str]:
    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise InputError(f"cannot read domains file {path}: {exc}") from exc
    domains = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            domains.append(line.lower())
    return domains


def _read_categories_file(path: str) -> dict[str, str]:
    import csv as _csv

    try:
        text = Path(path).read_text("utf-8")
    except OSError as exc:
        raise InputError(f"cannot read categories file {path}: {exc}") from exc
    mapping: dict[str, str] = {}
    for row in _csv.reader(text.splitlines()):
        if len(row) < 2:
            continue
        domain, category = row[0].strip().lower(), row[1].strip()
        if not domain or domain == "domain":
            continue
        if category:
            mapping[domain] = category
    return mapping


def _build_index_client(config: RunConfig) -> IndexClient:
    if config.offline and not config.index_fixtures:
        raise RuntimeFailure(
            "offline mode: no recorded index fixtures configured (--index-fixtures)"
        )
    return IndexClient(
        base_url=config.index_base_url,
        user_agent=config.user_agent,
        allow_any_subdomain=config.allow_any_subdomain,
        offline_dir=config.index_fixtures,
    )


def _build_fetcher(config: RunConfig, offline: bool | None = None) -> ArchiveFetcher:
    policy = FetchPolicy(cache_dir=config.effective_cache_dir())
    return ArchiveFetcher(
        policy=policy,
        base_url=config.archive_base_url,
        user_agent=config.user_agent,
        offline=config.offline if offline is None else offline,
    )


def _write_jsonl(path: Path, dicts: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for d in dicts:
            fh.write(json.dumps(d, sort_keys=True, separators=(",", ":")) + "\n")


def _read_locations(path: Path) -> list[tuple[str, CaptureLocation | None]]:
    if not path.exists():
        raise InputError(f"locations file {path} does not exist (run `locate` first)")
    out = []
    for line in path.read_text("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            d = json.loads(line)
            capture = d.get("capture")
            out.append(
                (d["domain"], CaptureLocation.from_json_dict(capture) if capture else None)
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise InputError(f"malformed locations file {path}: {exc}") from exc
    return out


def cmd_locate(config: RunConfig) -> int:
    if not config.domains_file:
        raise InputError("locate needs --domains")
    if not config.crawl_id:
        raise InputError("locate needs --crawl")
    domains = _read_domains_file(config.domains_file)
    config.out.mkdir(parents=True, exist_ok=True)
    if not domains:
        _log(logging.WARNING, "locate", "domains file is empty; nothing to locate")
        _write_jsonl(config.out / "locations.jsonl", [])
        return EXIT_OK

    client = _build_index_client(config)
    results: list[CaptureLocation | None] = [None] * len(domains)

    def lookup(i: int, domain: str) -> None:
        results[i] = client.lookup_homepage(domain, config.crawl_id)

    try:
        with ThreadPoolExecutor(max_workers=2) as pool:
            futures = [pool.submit(lookup, i, d) for i, d in enumerate(domains)]
            for future in futures:
                future.result()
    except IndexUnreachableError as exc:
        raise RuntimeFailure(str(exc)) from exc

    lines = []
    for domain, capture in zip(domains, results):
        lines.append({"domain": domain, "capture": capture.to_json_dict() if capture else None})
        if capture is None:
            _log(logging.INFO, "locate", "no qualifying capture", domain)
    _write_jsonl(config.out / "locations.jsonl", lines)
    (config.out / "query.sql").write_text(emit_athena_sql(domains, config.crawl_id), "utf-8")
    found = sum(1 for _, c in zip(domains, results) if c)
    _log(logging.INFO, "locate", f"located {found} of {len(domains)} domains")
    return EXIT_OK


def cmd_fetch(config: RunConfig) -> int:
    locations = _read_locations(config.out / "locations.jsonl")
    cache_dir = config.effective_cache_dir()
    try:
        cache_dir.mkdir(parents=True, exist_ok=True)
        probe = cache_dir / ".write-probe"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise RuntimeFailure(f"cache directory not writable: {exc}") from exc

    fetcher = _build_fetcher(config)
    manifest: list[dict | None] = [None] * len(locations)

    def work(i: int, domain: str, capture: CaptureLocation | None) -> None:
        if capture is None:
            manifest[i] = {"domain": domain, "outcome": "not-found"}
            return
        entry = {
            "domain": domain,
            "url": capture.url,
            "warc_filename": capture.warc_filename,
            "offset": capture.offset,
            "length": capture.length,
        }
        try:
            data = fetcher.fetch_record_bytes(capture)
        except FetchError as exc:
            entry["outcome"] = exc.outcome
            _log(logging.WARNING, "fetch", f"{exc.outcome}: {exc}", domain)
        except Exception as exc:
            entry["outcome"] = "transport-error"
            _log(logging.WARNING, "fetch", f"transport-error: {exc}", domain)
        else:
            entry["outcome"] = "ok"
            entry["bytes"] = len(data)
        manifest[i] = entry

    with ThreadPoolExecutor(max_workers=max(1, config.workers)) as pool:
        futures = [
            pool.submit(work, i, domain, capture)
            for i, (domain, capture) in enumerate(locations)
        ]
        for future in futures:
            future.result()

    _write_jsonl(config.out / "fetch_manifest.jsonl", [m for m in manifest if m])
    ok = sum(1 for m in manifest if m and m["outcome"] == "ok")
    _log(logging.INFO, "fetch", f"fetched {ok} of {len(locations)} records")
    return EXIT_OK


def cmd_analyze(config: RunConfig) -> int:
    locations = _read_locations(config.out / "locations.jsonl")
    cache_dir = config.effective_cache_dir()
    if not cache_dir.exists():
        raise InputError(f"cache directory {cache_dir} does not exist (run `fetch` first)")

    categories = _read_categories_file(config.categories_file) if config.categories_file else {}
    located = {domain: capture for domain, capture in locations}
    fetcher = _build_fetcher(config, offline=True)  # analysis never hits the network
    jobs = [
        (domain, pipeline.assign_category(domain, categories)) for domain, _ in locations
    ]
    audits = pipeline.run_audit(
        jobs,
        locator=lambda domain: located.get(domain),
        fetcher=fetcher,
        workers=config.workers,
        partial_path=config.out / "results.jsonl.partial",
    )
    _write_jsonl(config.out / "results.jsonl", [a.to_json_dict() for a in audits])
    partial = config.out / "results.jsonl.partial"
    if partial.exists():
        partial.unlink()
    analysed = sum(1 for a in audits if a.outcome == pipeline.OUTCOME_ANALYSED)
    _log(logging.INFO, "analyze", f"analysed {analysed} of {len(audits)} domains")
    return EXIT_OK


def cmd_report(config: RunConfig) -> int:
    results_path = config.out / "results.jsonl"
    if not results_path.exists():
        raise InputError(f"results file {results_path} does not exist (run `analyze` first)")
    audits = []
    for line in results_path.read_text("utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            audits.append(pipeline.SiteAudit.from_json_dict(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise InputError(f"malformed results file {results_path}: {exc}") from exc
    aggregated = report_mod.aggregate(audits)
    config.out.mkdir(parents=True, exist_ok=True)
    for fmt in config.formats:
        for name, data in report_mod.render(aggregated, fmt).items():
            (config.out / name).write_bytes(data)
            _log(logging.INFO, "report", f"wrote {name}")
    return EXIT_OK


def cmd_run(config: RunConfig) -> int:
    for step in (cmd_locate, cmd_fetch, cmd_analyze, cmd_report):
        code = step(config)
        if code != EXIT_OK:
            return code
    return EXIT_OK


def _check_colors(fg_text: str, bg_text: str) -> int:
    fg = parse_color(fg_text)
    bg = parse_color(bg_text)
    problems = [
        text for text, parsed in ((fg_text, fg), (bg_text, bg))
        if not isinstance(parsed, RgbaColor)
    ]
    if problems:
        print(f"not a concrete colour: {', '.join(problems)}", file=sys.stderr)
        return EXIT_INPUT
    result = assess(fg, bg)
    print(
        f"{result.ratio:.2f}:1 "
        f"{'PASS' if result.passes_normal else 'FAIL'} "
        f"{'PASS' if result.passes_large else 'FAIL'}"
    )
    return EXIT_OK if result.passes_normal else EXIT_POLICY


def _check_html(path: str) -> int:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    pairings = build_pairings(extract_declarations(data))
    if not pairings:
        print("no colour pairings found")
        return EXIT_OK
    all_pass = True
    for pairing in pairings:
        result = assess(pairing.fg, pairing.bg)
        all_pass = all_pass and result.passes_normal
        print(
            f"{pairing.fg.css_hex()} on {pairing.bg.css_hex()}: {result.ratio:.2f}:1 "
            f"{'PASS' if result.passes_normal else 'FAIL'} "
            f"{'PASS' if result.passes_large else 'FAIL'} "
            f"({pairing.provenance})"
        )
    return EXIT_OK if all_pass else EXIT_POLICY


def cmd_check(targets: list[str]) -> int:
    if len(targets) == 2:
        return _check_colors(targets[0], targets[1])
    if len(targets) == 1:
        return _check_html(targets[0])
    print("check takes two colour strings or one HTML file path", file=sys.stderr)
    return EXIT_INPUT


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        if args.command == "check":
            return cmd_check(args.targets)
        config = resolve_config(args)
        handler = {
            "locate": cmd_locate,
            "fetch": cmd_fetch,
            "analyze": cmd_analyze,
            "report": cmd_report,
            "run": cmd_run,
        }[args.command]
        return handler(config)
    except InputError as exc:
        _log(logging.ERROR, args.command, str(exc))
        return EXIT_INPUT
    except RuntimeFailure as exc:
        _log(logging.ERROR, args.command, str(exc))
        return EXIT_RUNTIME
    except Exception as exc:  # systemic: never tracebacks at users
        _log(logging.ERROR, args.command, f"unexpected failure: {exc}")
        return EXIT_RUNTIME


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
