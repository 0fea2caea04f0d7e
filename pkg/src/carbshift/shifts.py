"""Parsers for the two NMR shift-table dialects.

The experimental dialect is a CSV of per-atom rows grouped into
contiguous monosaccharide blocks; the simulated dialect is a pair of
TSV files (one per nucleus) with one monosaccharide per line. Both are
reduced to the same ShiftTable so the matcher never cares where a table
came from. Dialects are always selected explicitly, never sniffed.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass

from .errors import InconsistentResidues, NoRecords, UnparseableShift

# physical sanity windows, ppm; values outside are treated as parse errors
H_SHIFT_RANGE = (-2.0, 15.0)
C_SHIFT_RANGE = (0.0, 250.0)

_RING_LABEL = re.compile(r"^([CH])(\d)$")
_LETTER_NUM = re.compile(r"^([A-Za-z])[-_ ]?(\d+)$")
_NUM_LETTER = re.compile(r"^(\d+)[-_ ]?([A-Za-z])$")

_MISSING = {"", "-", "?", "n/a", "na", "nan"}


@dataclass(frozen=True)
class ShiftRecord:
    """Shifts of a single monosaccharide unit.

    mono_index is the record's order in the source file; lineage is the
    unparsed parent-linkage descriptor (e.g. ", 4", or a root marker).
    ring_position_shifts maps normalized position labels ("C1", "H5",
    plus modification labels kept verbatim) to ppm values.
    """

    mono_index: int
    mono_name: str
    lineage: str
    ring_position_shifts: dict[str, float]


@dataclass(frozen=True)
class ShiftTable:
    carbohydrate_id: str
    records: tuple[ShiftRecord, ...]
    trust_flags: dict[int, float] | None = None  # mono_index -> error, ppm

    def total_shift_count(self) -> int:
        return sum(len(r.ring_position_shifts) for r in self.records)


def normalize_position_label(raw: str) -> str:
    """Canonicalize a position label to nucleus letter + number.

    "C1", "c-1", "1H", "H_5" all collapse to the "C1"/"H1"/"H5" form;
    anything else (modification labels like "Me", "NAc") is uppercased
    and returned otherwise unchanged.
    """
    text = raw.strip()
    m = _LETTER_NUM.match(text)
    if m:
        return f"{m.group(1).upper()}{int(m.group(2))}"
    m = _NUM_LETTER.match(text)
    if m:
        return f"{m.group(2).upper()}{int(m.group(1))}"
    return text.upper()


def is_ring_label(label: str) -> bool:
    """True for single-digit C/H position labels, the main-ring alphabet."""
    return bool(_RING_LABEL.match(label))


def _check_window(label: str, value: float, context: str) -> None:
    nucleus = label[0] if label else ""
    if nucleus == "H":
        lo, hi = H_SHIFT_RANGE
    elif nucleus == "C":
        lo, hi = C_SHIFT_RANGE
    else:
        return
    if not (lo <= value <= hi):
        raise UnparseableShift(
            f"{context}: {label} shift {value} ppm outside [{lo}, {hi}]"
        )


def _parse_shift_cell(cell: str, label: str, context: str) -> float | None:
    text = cell.strip()
    if text.lower() in _MISSING:
        return None
    try:
        value = float(text)
    except ValueError:
        raise UnparseableShift(f"{context}: bad shift cell {cell!r}")
    _check_window(label, value, context)
    return value


def _find_column(headers: list[str], candidates: tuple[str, ...]) -> int | None:
    lowered = [h.strip().lower() for h in headers]
    for cand in candidates:
        if cand in lowered:
            return lowered.index(cand)
    return None


def parse_exp_shifts(text: str, carbohydrate_id: str = "") -> ShiftTable:
    """Parse the experimental CSV dialect.

    One row per atom; contiguous rows sharing (residue, linkage) form one
    monosaccharide block. Rows with empty shift cells contribute no entry;
    blocks survive even if every cell in them is empty, so record order
    still mirrors the monosaccharide list of the source file.
    """
    reader = csv.reader(io.StringIO(text))
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise NoRecords(f"{carbohydrate_id or 'input'}: empty shift file")
    headers = rows[0]
    col_res = _find_column(headers, ("residue", "mono", "monosaccharide",
                                     "residue_name", "mono_name", "name"))
    col_atom = _find_column(headers, ("atom", "atom_name", "label"))
    col_shift = _find_column(headers, ("shift", "shift_ppm", "ppm", "value"))
    col_link = _find_column(headers, ("linkage", "lineage", "link"))
    if None in (col_res, col_atom, col_shift, col_link):
        raise NoRecords(
            f"{carbohydrate_id or 'input'}: missing residue/atom/shift/linkage columns"
        )

    records: list[ShiftRecord] = []
    current_key: tuple[str, str] | None = None
    current: dict[str, float] = {}

    def flush() -> None:
        if current_key is not None:
            records.append(ShiftRecord(
                mono_index=len(records),
                mono_name=current_key[0],
                lineage=current_key[1],
                ring_position_shifts=dict(current),
            ))

    for line_no, row in enumerate(rows[1:], start=2):
        res = row[col_res].strip()
        link = row[col_link].strip()
        key = (res, link)
        if key != current_key:
            flush()
            current_key = key
            current = {}
        label = normalize_position_label(row[col_atom])
        value = _parse_shift_cell(row[col_shift], label, f"line {line_no}")
        if value is None:
            continue
        if label in current:
            raise UnparseableShift(
                f"line {line_no}: duplicate position label {label!r} in one block"
            )
        current[label] = value
    flush()

    table = ShiftTable(carbohydrate_id=carbohydrate_id, records=tuple(records))
    if table.total_shift_count() == 0:
        raise NoRecords(f"{carbohydrate_id or 'input'}: no shift values")
    return table


def _parse_sim_file(text: str, context: str) -> list[tuple[str, str, dict[str, float], float | None]]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 2:
        raise NoRecords(f"{context}: empty shift file")
    headers = lines[0].split("\t")
    lowered = [h.strip().lower() for h in headers]
    col_res = _find_column(headers, ("residue", "mono", "monosaccharide", "name"))
    col_link = _find_column(headers, ("linkage", "lineage", "link"))
    if col_res is None or col_link is None:
        raise NoRecords(f"{context}: missing residue/linkage columns")
    col_err = lowered.index("error") if "error" in lowered else None
    position_cols = [
        (i, normalize_position_label(h))
        for i, h in enumerate(headers)
        if i not in (col_res, col_link, col_err)
    ]

    out = []
    for line_no, line in enumerate(lines[1:], start=2):
        cells = line.split("\t")
        name = cells[col_res].strip()
        lineage = cells[col_link].strip()
        shifts: dict[str, float] = {}
        for i, label in position_cols:
            if i >= len(cells):
                continue
            value = _parse_shift_cell(cells[i], label, f"{context} line {line_no}")
            if value is not None:
                shifts[label] = value
        err = None
        if col_err is not None and col_err < len(cells):
            raw = cells[col_err].strip()
            if raw.lower() not in _MISSING:
                try:
                    err = float(raw)
                except ValueError:
                    raise UnparseableShift(
                        f"{context} line {line_no}: bad error cell {raw!r}"
                    )
        out.append((name, lineage, shifts, err))
    return out


def parse_sim_shifts(c_text: str, h_text: str, carbohydrate_id: str = "") -> ShiftTable:
    """Parse and merge the simulated TSV pair (carbon file, hydrogen file).

    Both files list the same monosaccharides in the same order; the i-th
    lines merge into one ShiftRecord. Simulation error columns, when
    present in either file, populate trust_flags with the worse of the
    two estimates.
    """
    c_rows = _parse_sim_file(c_text, f"{carbohydrate_id or 'input'} [C]")
    h_rows = _parse_sim_file(h_text, f"{carbohydrate_id or 'input'} [H]")
    if len(c_rows) != len(h_rows):
        raise InconsistentResidues(
            f"{carbohydrate_id or 'input'}: carbon file lists {len(c_rows)} "
            f"monosaccharides, hydrogen file {len(h_rows)}"
        )

    records: list[ShiftRecord] = []
    trust: dict[int, float] = {}
    for idx, ((c_name, c_link, c_shifts, c_err),
              (h_name, h_link, h_shifts, h_err)) in enumerate(zip(c_rows, h_rows)):
        if (c_name, c_link) != (h_name, h_link):
            raise InconsistentResidues(
                f"{carbohydrate_id or 'input'} record {idx}: "
                f"{(c_name, c_link)} vs {(h_name, h_link)}"
            )
        merged = dict(c_shifts)
        for label, value in h_shifts.items():
            if label in merged:
                raise UnparseableShift(
                    f"{carbohydrate_id or 'input'} record {idx}: "
                    f"label {label!r} present in both nucleus files"
                )
            merged[label] = value
        records.append(ShiftRecord(
            mono_index=idx, mono_name=c_name, lineage=c_link,
            ring_position_shifts=merged,
        ))
        errs = [e for e in (c_err, h_err) if e is not None]
        if errs:
            trust[idx] = max(errs)

    return ShiftTable(
        carbohydrate_id=carbohydrate_id,
        records=tuple(records),
        trust_flags=trust or None,
    )
