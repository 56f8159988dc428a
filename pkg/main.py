"""Pipeline orchestrator and command-line entry point.

Every stage reads and writes line-delimited artifacts in the working
directory; ``pipeline`` chains them end-to-end:

  ingest → pair → split → stats → labels → train → summarize → paraphrase
  → baseline (lead, lexrank, oracle) → evaluate → comparison.txt

Usage: uv run python main.py [global flags] <subcommand> [subcommand flags]
       uv run python main.py --workdir work pipeline
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from collections.abc import Callable
from datetime import datetime
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, field_validator

import store
from encoder import DEFAULT_HASH_SIZE, ConfigError
from extractor import HIDDEN_DIM, WORD_BUDGET, TrainConfig

logger = logging.getLogger(__name__)

# ---------------------------------------------------------------------------
# Configuration constants (adjust as needed)
# ---------------------------------------------------------------------------

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE = 2
EXIT_MISSING_INPUT = 3
EXIT_CONFIG = 4

FIXTURES_DIR = Path(__file__).resolve().parent / "fixtures"
DEFAULT_TRANSCRIPTS = FIXTURES_DIR / "raw_transcripts.jsonl"
DEFAULT_ARTICLES = FIXTURES_DIR / "raw_articles.jsonl"

BASELINE_METHODS = ("lead", "lexrank", "oracle")

# Settings that never change artifact bytes stay out of the provenance hash.
_HASH_EXCLUDE: dict = {
    "workdir": True, "threads": True, "verbose": True,
    "transcripts": True, "articles": True, "train": {"threads"},
}


# ---------------------------------------------------------------------------
# Run configuration
# ---------------------------------------------------------------------------


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    workdir: str = "work"
    transcripts: str | None = None
    articles: str | None = None
    seed: int = 0
    encoder: str = "lexical"
    hash_size: int = Field(default=DEFAULT_HASH_SIZE, ge=1)
    word_budget: int = Field(default=WORD_BUDGET, ge=1)
    max_merge: int | None = Field(default=None, ge=1)
    backend: str = "rule"
    train: TrainConfig = Field(default_factory=TrainConfig)
    hidden_dim: int = Field(default=HIDDEN_DIM, ge=1)
    threads: int = Field(default=1, ge=1)
    xlsx: bool = False
    verbose: bool = False

    def config_hash(self) -> str:
        canonical = json.dumps(
            self.model_dump(mode="json", exclude=_HASH_EXCLUDE), sort_keys=True, separators=(",", ":"),
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @field_validator("encoder")
    @classmethod
    def _known_encoder(cls, v: str) -> str:
        if v != "lexical" and not (v.startswith("precomputed:") and len(v) > len("precomputed:")):
            raise ValueError(f"encoder must be 'lexical' or 'precomputed:<path>', got '{v}'")
        return v

    @field_validator("backend")
    @classmethod
    def _known_backend(cls, v: str) -> str:
        if v not in ("rule", "identity") and not (v.startswith("command:") and len(v) > len("command:")):
            raise ValueError(f"backend must be 'rule', 'identity' or 'command:<cmd>', got '{v}'")
        return v

    def train_config(self) -> TrainConfig:
        return self.train.model_copy(update={"seed": self.seed, "threads": self.threads})


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main.py", description="Earnings-call summarization pipeline")
    parser.add_argument("--workdir", help="directory holding every stage artifact")
    parser.add_argument("--config", help="JSON file of RunConfig settings; flags override it")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--word-budget", type=int, dest="word_budget")
    parser.add_argument("--encoder", help="'lexical' or 'precomputed:<path>'")
    parser.add_argument("--hash-size", type=int, dest="hash_size")
    parser.add_argument("--backend", help="'rule', 'identity' or 'command:<cmd>'")
    parser.add_argument("--max-merge", type=int, dest="max_merge")
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--learning-rate", type=float, dest="learning_rate")
    parser.add_argument("--batch-size", type=int, dest="batch_size")
    parser.add_argument("--hidden-dim", type=int, dest="hidden_dim")
    parser.add_argument("--xlsx", action="store_true", default=None, help="also write xlsx reports")
    parser.add_argument("--verbose", action="store_true", default=None)

    sub = parser.add_subparsers(dest="command", required=True)
    ingest = sub.add_parser("ingest", help="clean raw transcripts and articles")
    ingest.add_argument("--transcripts")
    ingest.add_argument("--articles")
    for name in ("pair", "split", "stats", "labels", "train", "summarize", "paraphrase"):
        sub.add_parser(name)
    baseline = sub.add_parser("baseline", help="summarize the test split with a baseline")
    baseline.add_argument("--method", choices=BASELINE_METHODS, required=True)
    evaluate = sub.add_parser("evaluate", help="score a predictions file")
    evaluate.add_argument("--predictions", required=True)
    evaluate.add_argument("--name")
    pipeline = sub.add_parser("pipeline", help="run every stage end-to-end")
    pipeline.add_argument("--transcripts")
    pipeline.add_argument("--articles")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Config file values first, then every flag that was given."""
    values: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        values = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: config must be a JSON object")

    for key in ("workdir", "seed", "threads", "word_budget", "encoder", "hash_size", "backend",
                "max_merge", "hidden_dim", "xlsx", "verbose", "transcripts", "articles"):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value

    train_values = dict(values.get("train", {}))
    for flag, field in (("epochs", "max_epochs"), ("learning_rate", "learning_rate"), ("batch_size", "batch_size")):
        value = getattr(args, flag, None)
        if value is not None:
            train_values[field] = value
    values["train"] = train_values
    return RunConfig.model_validate(values)


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


def _write_manifest(workdir: Path, data: dict) -> None:
    state_dir = workdir / store.PIPELINE_STATE_DIR
    state_dir.mkdir(parents=True, exist_ok=True)
    (state_dir / "run_manifest.json").write_text(json.dumps(data, indent=2, default=str))


# ---------------------------------------------------------------------------
# Stages
# ---------------------------------------------------------------------------


def _stage_ingest(cfg: RunConfig, h: str) -> dict:
    from corpus import run_ingest

    return run_ingest(
        cfg.transcripts or DEFAULT_TRANSCRIPTS, cfg.articles or DEFAULT_ARTICLES,
        cfg.workdir, h, threads=cfg.threads,
    )


def _stage_pair(cfg: RunConfig, h: str) -> dict:
    from pairing import run_pair

    return run_pair(cfg.workdir, h, max_merge=cfg.max_merge)


def _stage_split(cfg: RunConfig, h: str) -> dict:
    from pairing import run_split

    split = run_split(cfg.workdir, h, cfg.seed)
    return {"train": len(split.train), "validation": len(split.validation), "test": len(split.test)}


def _stage_stats(cfg: RunConfig, h: str) -> dict:
    from stats import run_stats

    stats = run_stats(cfg.workdir, h, threads=cfg.threads, xlsx=cfg.xlsx)
    return {"n_docs": stats.n_docs, "coverage": stats.coverage, "density": stats.density,
            "compression": stats.compression}


def _stage_labels(cfg: RunConfig, h: str) -> dict:
    from labels import run_labels

    return run_labels(cfg.workdir, h, cfg.encoder, hash_size=cfg.hash_size, threads=cfg.threads)


def _stage_train(cfg: RunConfig, h: str) -> dict:
    from extractor import run_train

    return run_train(cfg.workdir, h, cfg.encoder, cfg.train_config(), hidden_dim=cfg.hidden_dim)


def _stage_summarize(cfg: RunConfig, h: str) -> dict:
    from extractor import run_summarize

    return {"summaries": run_summarize(cfg.workdir, h, cfg.encoder, cfg.word_budget, threads=cfg.threads)}


def _stage_paraphrase(cfg: RunConfig, h: str) -> dict:
    from paraphraser import run_paraphrase

    return run_paraphrase(cfg.workdir, h, cfg.backend, threads=cfg.threads)


def _run_baseline(cfg: RunConfig, h: str, method: str) -> dict:
    from baselines import run_baseline

    count = run_baseline(cfg.workdir, h, method, cfg.encoder, cfg.word_budget, threads=cfg.threads)
    return {"summaries": count}


def _run_evaluate(cfg: RunConfig, h: str, predictions: str | Path, name: str):
    from metrics import run_evaluate

    return run_evaluate(cfg.workdir, h, predictions, name=name, threads=cfg.threads, xlsx=cfg.xlsx)


def _report_counts(report) -> dict:
    return {"n_evaluated": report.n_evaluated, **report.means}


_SIMPLE_STAGES: dict[str, Callable[[RunConfig, str], dict]] = {
    "ingest": _stage_ingest,
    "pair": _stage_pair,
    "split": _stage_split,
    "stats": _stage_stats,
    "labels": _stage_labels,
    "train": _stage_train,
    "summarize": _stage_summarize,
    "paraphrase": _stage_paraphrase,
}


def _run_pipeline(cfg: RunConfig, h: str, manifest: dict, workdir: Path) -> None:
    from baselines import baseline_file
    from report import write_comparison

    def _step(name: str, fn: Callable[[], dict]) -> None:
        manifest["status"] = name
        manifest["current_stage"] = name
        _write_manifest(workdir, manifest)
        manifest["counts"][name] = fn()
        manifest["steps_completed"].append(name)
        _write_manifest(workdir, manifest)

    for name in ("ingest", "pair", "split", "stats", "labels", "train", "summarize", "paraphrase"):
        _step(name, lambda name=name: _SIMPLE_STAGES[name](cfg, h))
    for method in BASELINE_METHODS:
        _step(f"baseline_{method}", lambda method=method: _run_baseline(cfg, h, method))

    systems = [(m, workdir / baseline_file(m)) for m in BASELINE_METHODS]
    systems += [("extractive", workdir / store.EXTRACTIVE_FILE), ("paraphrased", workdir / store.PARAPHRASED_FILE)]
    reports = []
    for name, path in systems:
        def _evaluate(name=name, path=path) -> dict:
            report = _run_evaluate(cfg, h, path, name)
            reports.append(report)
            return _report_counts(report)

        _step(f"evaluate_{name}", _evaluate)
    logger.info("pipeline: system comparison\n%s", write_comparison(workdir, reports))


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def _exit_code(error: BaseException, stage: str) -> int:
    if isinstance(error, FileNotFoundError):
        return EXIT_MISSING_INPUT
    if isinstance(error, ConfigError) or stage == "config":
        return EXIT_CONFIG
    return EXIT_DATA_ERROR


def _fail(error: BaseException, stage: str, manifest: dict | None, workdir: Path | None) -> int:
    code = _exit_code(error, stage)
    record = {
        "status": "ABORTED",
        "stage": stage,
        "error_type": type(error).__name__,
        "message": str(error),
        "exit_code": code,
    }
    print(json.dumps(record, sort_keys=True), file=sys.stderr)
    if manifest is not None and workdir is not None:
        manifest["status"] = "ABORTED"
        manifest["abort_reason"] = record
        _write_manifest(workdir, manifest)
    logger.error("=== %s ABORTED (%s) ===", stage, type(error).__name__)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        cfg = load_run_config(args)
    except (OSError, ValueError, TypeError) as e:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
        return _fail(e, "config", None, None)

    logging.basicConfig(level=logging.DEBUG if cfg.verbose else logging.INFO, format="%(levelname)s %(message)s")
    workdir = Path(cfg.workdir)
    h = cfg.config_hash()
    run_id = datetime.now().strftime("%Y%m%d_%H%M%S")
    logger.info("=== %s start  run_id=%s  config=%s ===", args.command, run_id, h[:12])

    manifest: dict = {
        "run_id": run_id,
        "started_at": datetime.now().isoformat(),
        "command": args.command,
        "config_hash": h,
        "status": "started",
        "steps_completed": [],
        "counts": {},
        "abort_reason": None,
    }
    _write_manifest(workdir, manifest)

    try:
        if args.command == "pipeline":
            _run_pipeline(cfg, h, manifest, workdir)
        else:
            manifest["status"] = args.command
            if args.command in _SIMPLE_STAGES:
                counts = _SIMPLE_STAGES[args.command](cfg, h)
            elif args.command == "baseline":
                counts = _run_baseline(cfg, h, args.method)
            else:
                name = args.name or Path(args.predictions).stem
                counts = _report_counts(_run_evaluate(cfg, h, args.predictions, name))
            manifest["counts"][args.command] = counts
            manifest["steps_completed"].append(args.command)
    except Exception as e:  # noqa: BLE001
        return _fail(e, manifest.get("current_stage", args.command), manifest, workdir)

    manifest["status"] = "completed"
    manifest["finished_at"] = datetime.now().isoformat()
    _write_manifest(workdir, manifest)
    logger.info("=== %s complete  run_id=%s ===", args.command, run_id)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
