"""Line-delimited artifact files shared by every stage.

Each artifact is a JSONL file whose first line is a header record
``{"format": ..., "version": ..., "config_hash": ...}``; every following line
is one record. Writers never embed timestamps, so identical inputs and
configuration give identical bytes.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Iterable, Iterator
from pathlib import Path
from typing import Any

from pydantic import BaseModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

# ---------------------------------------------------------------------------
# Artifact file names (relative to the working directory)
# ---------------------------------------------------------------------------

TRANSCRIPTS_FILE = "transcripts.jsonl"
ARTICLES_FILE = "articles.jsonl"
PAIRS_FILE = "pairs.jsonl"
SPLIT_FILE = "split.jsonl"
STATS_FILE = "stats.jsonl"
STATS_TABLE_FILE = "stats.txt"
ENCODER_FILE = "encoder.bin"
LABELS_FILE = "labels.jsonl"
PARAPHRASE_PAIRS_FILE = "paraphrase_pairs.jsonl"
REWRITER_TRAIN_FILE = "rewriter_train.jsonl"
CHECKPOINT_FILE = "extractor.ckpt"
TRAIN_LOG_FILE = "train_log.jsonl"
EXTRACTIVE_FILE = "extractive.jsonl"
PARAPHRASED_FILE = "paraphrased.jsonl"
COMPARISON_FILE = "comparison.txt"
PIPELINE_STATE_DIR = ".pipeline_state"


class ArtifactHeader(BaseModel):
    format: str
    version: int = FORMAT_VERSION
    config_hash: str


class ArtifactError(ValueError):
    """An artifact file is empty, has no header, or holds another format."""


def _dump(record: BaseModel | dict[str, Any]) -> str:
    if isinstance(record, BaseModel):
        return record.model_dump_json()
    return json.dumps(record, sort_keys=True, ensure_ascii=False)


def write_records(
    path: str | Path,
    kind: str,
    records: Iterable[BaseModel | dict[str, Any]],
    config_hash: str,
) -> int:
    """Write header + one record per line; returns the record count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = ArtifactHeader(format=kind, config_hash=config_hash)
    lines = [header.model_dump_json()]
    lines.extend(_dump(r) for r in records)
    tmp_path = path.with_name(path.name + ".tmp")
    tmp_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    tmp_path.replace(path)
    count = len(lines) - 1
    logger.info("store: wrote %s (%d records)", path, count)
    return count


def read_records(path: str | Path, kind: str) -> tuple[ArtifactHeader, list[dict[str, Any]]]:
    """Read an artifact written by ``write_records``; checks the format tag."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"artifact not found: {path}")
    lines = [line for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines:
        raise ArtifactError(f"{path}: empty artifact")
    header = ArtifactHeader.model_validate_json(lines[0])
    if header.format != kind:
        raise ArtifactError(f"{path}: expected format '{kind}', found '{header.format}'")
    return header, [json.loads(line) for line in lines[1:]]


def iter_raw_records(path: str | Path) -> Iterator[tuple[int, dict[str, Any]]]:
    """Yield (line_number, record) from a header-less external JSONL input.

    Lines that are not JSON objects are skipped with a warning.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input not found: {path}")
    with path.open(encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as e:
                logger.warning("store: %s line %d is not JSON (%s). Dropped.", path, line_number, e)
                continue
            if not isinstance(record, dict):
                logger.warning("store: %s line %d is not an object. Dropped.", path, line_number)
                continue
            yield line_number, record


def write_text(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("store: wrote %s", path)
