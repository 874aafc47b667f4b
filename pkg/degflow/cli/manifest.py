"""Pair manifest CSV: one row per synthesized pair, skipped inputs in footer
comment lines."""

import csv
import dataclasses
import os
from typing import Sequence

from degflow.exceptions import ManifestError
from degflow.models import ManifestRow

HEADER = [f.name for f in dataclasses.fields(ManifestRow)]
SKIPPED_MARKER = "# skipped"


def write_manifest(
    path: str,
    rows: Sequence[ManifestRow],
    skipped: Sequence[tuple[str, str]] = (),
) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(HEADER)
        for row in rows:
            writer.writerow(dataclasses.astuple(row))
        for hr_path, reason in skipped:
            writer.writerow([SKIPPED_MARKER, hr_path, reason])


def read_manifest(path: str) -> tuple[list[ManifestRow], list[tuple[str, str]]]:
    """Returns the pair rows and the ``(hr_path, reason)`` footer entries.

    Raises:
        ManifestError: The file is missing, has the wrong header or a row
            with the wrong number of fields.
    """
    try:
        with open(path, newline="") as fp:
            records = list(csv.reader(fp))
    except (IOError, OSError) as e:
        raise ManifestError(f"Failed to read manifest at {path}: {e}") from e
    if not records or records[0] != HEADER:
        raise ManifestError(f"{path} does not start with {','.join(HEADER)}")
    rows, skipped = [], []
    for number, record in enumerate(records[1:], start=2):
        if record and record[0] == SKIPPED_MARKER:
            skipped.append((record[1], record[2] if len(record) > 2 else ""))
            continue
        if len(record) != len(HEADER):
            raise ManifestError(f"{path} line {number}: expected {len(HEADER)} fields")
        try:
            seed, euler_steps = int(record[2]), int(record[5])
        except ValueError:
            raise ManifestError(f"{path} line {number}: bad integer field") from None
        rows.append(
            ManifestRow(record[0], record[1], seed, record[3], record[4], euler_steps)
        )
    return rows, skipped
