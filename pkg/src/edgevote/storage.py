"""Dataset, model and result-table files."""

from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .config import load_json, write_output
from .constants import DATASET_FORMAT_VERSION, DATASET_MAGIC
from .errors import InputError
from .source import Dataset, SourceSpec
from .vote import VoteModel

logger = logging.getLogger(__name__)


# =============================================================================
# Datasets
# =============================================================================

def encode_dataset(dataset: Dataset) -> bytes:
    """Serialize a dataset.

    Layout: a magic line, one JSON header line, the labels packed to bits,
    then each row of values packed to bits.
    """
    header = {
        "version": DATASET_FORMAT_VERSION,
        "m": dataset.m,
        "N": dataset.N,
        "K": dataset.K,
        "seed": dataset.seed,
        "stream": dataset.stream,
        "spec_fingerprint": dataset.spec_fingerprint,
    }
    parts = [
        f"{DATASET_MAGIC}\n".encode("ascii"),
        (json.dumps(header, sort_keys=True) + "\n").encode("utf-8"),
        np.packbits(dataset.labels).tobytes(),
        np.packbits(dataset.values, axis=1).tobytes(),
    ]
    return b"".join(parts)


def _optional_int(value) -> int | None:
    return None if value is None else int(value)


def decode_dataset(raw: bytes, spec: SourceSpec | None = None) -> Dataset:
    """Inverse of encode_dataset.

    Raises:
        InputError: If the bytes are not a dataset file, are truncated, or
            were drawn from a different source than ``spec``.
    """
    magic, _, rest = raw.partition(b"\n")
    if magic.decode("ascii", errors="replace") != DATASET_MAGIC:
        raise InputError("Not an edgevote dataset file")
    header_line, _, body = rest.partition(b"\n")
    try:
        header = json.loads(header_line)
        m, N = int(header["m"]), int(header["N"])
        K = _optional_int(header.get("K"))
    except (ValueError, KeyError, TypeError) as e:
        raise InputError(f"Malformed dataset header: {e}") from e
    if header.get("version") != DATASET_FORMAT_VERSION:
        raise InputError(f"Unsupported dataset format version {header.get('version')}")

    label_bytes = (m + 7) // 8
    row_bytes = (N + 7) // 8
    if len(body) != label_bytes + m * row_bytes:
        raise InputError(f"Dataset body has {len(body)} bytes, expected {label_bytes + m * row_bytes}")

    labels = np.unpackbits(np.frombuffer(body[:label_bytes], dtype=np.uint8), count=m)
    packed = np.frombuffer(body[label_bytes:], dtype=np.uint8).reshape(m, row_bytes)
    values = np.unpackbits(packed, axis=1, count=N)

    if spec is not None and spec.fingerprint() != header["spec_fingerprint"]:
        raise InputError("Dataset was drawn from a different source")
    return Dataset(
        labels.copy(), values.copy(), int(header["seed"]), str(header["spec_fingerprint"]),
        int(header.get("stream", 0)), K,
    )


def save_dataset(dataset: Dataset, path: str | Path) -> Path:
    return write_output(path, encode_dataset(dataset))


def load_dataset(path: str | Path, spec: SourceSpec | None = None) -> Dataset:
    try:
        raw = Path(path).expanduser().read_bytes()
    except OSError as e:
        raise InputError(f"Cannot read {path}: {e}") from e
    dataset = decode_dataset(raw, spec)
    logger.debug("Loaded %d x %d dataset from %s", dataset.m, dataset.N, path)
    return dataset


# =============================================================================
# Models
# =============================================================================

def save_model(model: VoteModel, path: str | Path) -> Path:
    return write_output(path, json.dumps(model.to_dict(), indent=2) + "\n")


def load_model(path: str | Path) -> VoteModel:
    data = load_json(path)
    if not isinstance(data, dict):
        raise InputError(f"{path}: model file must hold a JSON object")
    return VoteModel.from_dict(data)


# =============================================================================
# Tables
# =============================================================================

def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def rows_to_csv(rows: Iterable[Mapping], columns: Sequence[str]) -> str:
    """Render rows as CSV with a fixed column order; None becomes an empty cell."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({name: _cell(row.get(name)) for name in columns})
    return buffer.getvalue()


def write_csv(rows: Iterable[Mapping], columns: Sequence[str], path: str | Path) -> Path:
    return write_output(path, rows_to_csv(rows, columns))
