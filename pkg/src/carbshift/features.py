"""Per-atom feature derivation and encoding.

Every atom of an annotated structure becomes one tabular row carrying its
source fields, the monosaccharide-level features parsed from the matched
record's full name, per-modification shortest-path distances, and the
shift labels. The encoder turns rows into a fixed one-hot layout whose
schema is identical across molecules, which is what makes single-feature
ablation meaningful.
"""

from __future__ import annotations

import csv
import hashlib
import io
import logging
from dataclasses import dataclass, field

import numpy as np

from .annotate import LabeledStructure, ResidueMatch
from .bonds import BondGraph, atom_position_number
from .errors import CarbshiftError, UnknownFeatureName
from .nomenclature import (ANOMERS, CONFIGURATIONS, MODIFICATION_KINDS,
                           NON_SUGAR_CODES, RING_SIZES, STEMS,
                           parse_mono_name, ring_extent)
from .shifts import ShiftTable, is_ring_label

log = logging.getLogger(__name__)

RING_POSITIONS = ("1", "2", "3", "4", "5", "6", "7", "8", "9", "Other")
ATOM_TYPES = ("C", "H", "O", "N", "P", "S", "Other")
DISTANCE_BANDS = ("0-1", "2-3", "4-6", "absent")
PATH_KINDS = ("Me", "Ser", "Ac", "S", "Gc")  # kinds with distance columns
FEATURE_NAMES = ("ring_position", "atom_type", "stem", "anomer",
                 "configuration", "ring_size", "modification")

# exact output column order
CSV_COLUMNS = (
    "Atom_num", "Atom_name", "Residual_name", "Residual_num",
    "x", "y", "z", "Atom_type",
    "Residual_accurate_name", "Lineage", "Ac_component", "bound_AB",
    "fischer_projection_DL", "reformulated_standard_mono", "carbon_number_PF",
    "Me_min_atom_distance", "Me_min_atom_path",
    "Ser_atom_distance", "Ser_atom_path",
    "Ac_min_atom_distance", "Ac_min_atom_path",
    "S_min_atom_distance", "S_min_atom_path",
    "Gc_min_atom_distance", "Gc_min_atom_path",
    "main_ring_shift", "shift",
)


@dataclass(frozen=True)
class AnnotatedRow:
    """One atom with every derived feature; mirrors the exported CSV."""

    atom_num: int
    atom_name: str
    residual_name: str
    residual_num: int
    x: float
    y: float
    z: float
    atom_type: str
    residual_accurate_name: str = "N/A"
    lineage: str = ""
    ac_component: bool = False
    bound_ab: str = "N/A"
    fischer_projection_dl: str = "N/A"
    reformulated_standard_mono: str = "N/A"
    carbon_number_pf: str = "N/A"
    mod_distances: dict[str, int] = field(default_factory=dict)
    mod_paths: dict[str, tuple[str, ...]] = field(default_factory=dict)
    main_ring_shift: float | None = None
    shift: float | None = None


@dataclass(frozen=True)
class FeatureSchema:
    """Encoded column layout: feature names in force and one descriptor
    per column, stable across molecules."""

    features: tuple[str, ...]
    columns: tuple[str, ...]

    def digest(self) -> str:
        return hashlib.sha256("\n".join(self.columns).encode()).hexdigest()

    def render(self) -> str:
        head = [f"# features: {', '.join(self.features)}",
                f"# schema_digest: {self.digest()}"]
        body = [f"{i}\t{name}" for i, name in enumerate(self.columns)]
        return "\n".join(head + body) + "\n"


def modification_paths(
    ls: LabeledStructure, g: BondGraph
) -> dict[str, list[tuple[int, tuple[int, ...]] | None]]:
    """Distance and path from every atom to the nearest atom of each
    modification group present in the molecule.

    Returns {kind: per-atom list of (hop distance, path of atom indices)},
    None where the group is unreachable. Kinds with no group in this
    molecule are absent from the result.
    """
    groups = _modification_groups(ls)
    adj = g.neighbor_lists()
    out: dict[str, list[tuple[int, tuple[int, ...]] | None]] = {}
    for kind, members in sorted(groups.items()):
        if not members:
            continue
        dist = _bfs_from(members, adj, g.n)
        per_atom: list[tuple[int, tuple[int, ...]] | None] = []
        for a in range(g.n):
            if dist[a] < 0:
                per_atom.append(None)
                continue
            path = [a]
            cur = a
            while dist[cur] > 0:
                cur = min(w for w in adj[cur] if dist[w] == dist[cur] - 1)
                path.append(cur)
            per_atom.append((dist[a], tuple(path)))
        out[kind] = per_atom
    return out


def _bfs_from(sources: set[int], adj: list[list[int]], n: int) -> list[int]:
    dist = [-1] * n
    frontier = sorted(sources)
    for w in frontier:
        dist[w] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = d
                    nxt.append(w)
        frontier = nxt
    return dist


def _modification_groups(ls: LabeledStructure) -> dict[str, set[int]]:
    """Atom-index sets of each modification group.

    Within a matched sugar residue, group atoms are the ones outside the
    main-ring naming (position beyond the stem's ring extent, unnumbered,
    or a non-C/H/O element). Skipped residues whose code names a known
    group contribute whole residues.
    """
    s = ls.structure
    index_of = {a.serial: i for i, a in enumerate(s.atoms)}
    groups: dict[str, set[int]] = {}

    for res in s.residues:
        name = ls.residue_names.get(res.serial)
        if name is not None:
            parsed = parse_mono_name(name)
            kinds = sorted(set(parsed.modifications) & set(PATH_KINDS))
            if not kinds:
                continue
            extent = ring_extent(parsed.stem)
            members = set()
            for atom in res.atoms:
                pos = atom_position_number(atom.name)
                if (atom.element not in ("C", "H", "O")
                        or pos is None or pos > extent):
                    members.add(index_of[atom.serial])
            for kind in kinds:
                groups.setdefault(kind, set()).update(members)
        else:
            kind = NON_SUGAR_CODES.get(res.code.strip().upper())
            if kind:
                groups.setdefault(kind, set()).update(
                    index_of[a.serial] for a in res.atoms
                )
    return groups


def derive_features(
    ls: LabeledStructure, m: ResidueMatch, st: ShiftTable, g: BondGraph
) -> list[AnnotatedRow]:
    """One AnnotatedRow per atom, in structure order."""
    s = ls.structure
    mono: dict[int, tuple[str, str]] = {
        serial: (st.records[idx].mono_name, st.records[idx].lineage)
        for serial, idx in m.mapping.items()
    }

    code_of = {}
    for res in s.residues:
        for atom in res.atoms:
            code_of[atom.serial] = (res.code, res.serial)

    paths = modification_paths(ls, g)
    names = [a.name for a in s.atoms]

    rows: list[AnnotatedRow] = []
    for idx, atom in enumerate(s.atoms):
        code, res_serial = code_of[atom.serial]
        # skipped residues surface their code as the group name
        accurate, lineage = mono.get(res_serial, (code, ""))
        parsed = parse_mono_name(accurate)

        mod_distances: dict[str, int] = {}
        mod_paths: dict[str, tuple[str, ...]] = {}
        for kind, per_atom in paths.items():
            entry = per_atom[idx]
            if entry is None:
                continue
            dist, path = entry
            mod_distances[kind] = dist
            mod_paths[kind] = tuple(names[i] for i in path)

        label = ls.labels.get(atom.serial)
        shift = label.value if label else None
        main_ring = (
            label.value
            if label and is_ring_label(label.label) and atom.element in ("C", "H")
            else None
        )

        rows.append(AnnotatedRow(
            atom_num=atom.serial,
            atom_name=atom.name,
            residual_name=code,
            residual_num=res_serial,
            x=atom.coord[0], y=atom.coord[1], z=atom.coord[2],
            atom_type=atom.element,
            residual_accurate_name=accurate,
            lineage=lineage,
            ac_component=mod_distances.get("Ac") == 0,
            bound_ab=parsed.anomer,
            fischer_projection_dl=parsed.configuration,
            reformulated_standard_mono=parsed.stem,
            carbon_number_pf=parsed.ring_size,
            mod_distances=mod_distances,
            mod_paths=mod_paths,
            main_ring_shift=main_ring,
            shift=shift,
        ))
    return rows


def _deoxy_by_residue(rows: list[AnnotatedRow]) -> dict[int, bool]:
    """Deoxygenation per residue: declared in the name, or an expected
    ring-position oxygen (O2..O4) is missing. The absence heuristic is
    logged because it can misfire on unusual numbering."""
    by_res: dict[int, list[AnnotatedRow]] = {}
    for row in rows:
        by_res.setdefault(row.residual_num, []).append(row)

    flags: dict[int, bool] = {}
    for serial, members in by_res.items():
        name = members[0].residual_accurate_name
        if members[0].reformulated_standard_mono == "N/A":
            flags[serial] = False
            continue
        parsed = parse_mono_name(name)
        if "Deoxy" in parsed.modifications:
            flags[serial] = True
            continue
        oxy_positions = {
            atom_position_number(r.atom_name)
            for r in members if r.atom_type == "O"
        }
        carbon_positions = {
            atom_position_number(r.atom_name)
            for r in members if r.atom_type == "C"
        }
        missing = {
            p for p in (2, 3, 4)
            if p in carbon_positions and p not in oxy_positions
        }
        flags[serial] = bool(missing)
        if missing:
            log.info("residue %s (%s): no oxygen at position(s) %s, "
                     "flagging deoxygenation", serial, name, sorted(missing))
    return flags


def _band(distance: int | None) -> str:
    if distance is None or distance > 6:
        return "absent"
    if distance <= 1:
        return "0-1"
    if distance <= 3:
        return "2-3"
    return "4-6"


def _blocks_for(feature: str) -> list[tuple[str, tuple[str, ...]]]:
    if feature == "ring_position":
        return [("ring_position", RING_POSITIONS)]
    if feature == "atom_type":
        return [("atom_type", ATOM_TYPES)]
    if feature == "stem":
        return [("stem", STEMS)]
    if feature == "anomer":
        return [("anomer", ANOMERS)]
    if feature == "configuration":
        return [("configuration", CONFIGURATIONS)]
    if feature == "ring_size":
        return [("ring_size", RING_SIZES)]
    if feature == "modification":
        blocks = [("mod_ac_component", ("0", "1"))]
        blocks += [(f"mod_{kind}_band", DISTANCE_BANDS) for kind in PATH_KINDS]
        blocks.append(("mod_deoxy", ("0", "1")))
        return blocks
    raise UnknownFeatureName(feature)


def _block_value(block: str, row: AnnotatedRow, deoxy: dict[int, bool]) -> str:
    if block == "ring_position":
        pos = atom_position_number(row.atom_name)
        return str(pos) if pos is not None else "Other"
    if block == "atom_type":
        return row.atom_type if row.atom_type in ATOM_TYPES else "Other"
    if block == "stem":
        return row.reformulated_standard_mono
    if block == "anomer":
        return row.bound_ab
    if block == "configuration":
        return row.fischer_projection_dl
    if block == "ring_size":
        return row.carbon_number_pf
    if block == "mod_ac_component":
        return "1" if row.ac_component else "0"
    if block == "mod_deoxy":
        return "1" if deoxy.get(row.residual_num) else "0"
    if block.startswith("mod_") and block.endswith("_band"):
        kind = block[len("mod_"):-len("_band")]
        return _band(row.mod_distances.get(kind))
    raise UnknownFeatureName(block)


def encode_features(
    rows: list[AnnotatedRow],
    drop: str | list[str] | tuple[str, ...] | None = None,
    feature_set: tuple[str, ...] | None = None,
) -> tuple[np.ndarray, FeatureSchema]:
    """One-hot encode rows of a single carbohydrate.

    Each categorical block carries an explicit N/A (or absent) category,
    so every block of every row sums to exactly 1. drop removes whole
    feature blocks and is the single-feature ablation mechanism; it also
    accepts a list when several features must go at once.
    """
    active = list(feature_set if feature_set is not None else FEATURE_NAMES)
    for name in active:
        if name not in FEATURE_NAMES:
            raise UnknownFeatureName(name)
    dropped = [drop] if isinstance(drop, str) else list(drop or [])
    for name in dropped:
        if name not in active:
            raise UnknownFeatureName(
                f"{name!r} not among active features {active}"
            )
    active = [f for f in active if f not in dropped]

    blocks: list[tuple[str, tuple[str, ...]]] = []
    for feature in active:
        blocks.extend(_blocks_for(feature))
    columns = tuple(
        f"{block}={value}" for block, values in blocks for value in values
    )
    schema = FeatureSchema(features=tuple(active), columns=columns)

    deoxy = _deoxy_by_residue(rows) if "modification" in active else {}
    matrix = np.zeros((len(rows), len(columns)), dtype=float)
    col = 0
    for block, values in blocks:
        lookup = {v: i for i, v in enumerate(values)}
        for r, row in enumerate(rows):
            value = _block_value(block, row, deoxy)
            if value not in lookup:
                value = "N/A" if "N/A" in lookup else values[-1]
            matrix[r, col + lookup[value]] = 1.0
        col += len(values)
    return matrix, schema


def export_table(rows: list[AnnotatedRow]) -> str:
    """Render rows as CSV with the canonical column set; import_table
    reads it back losslessly."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(_row_cells(row))
    return buf.getvalue()


def _row_cells(row: AnnotatedRow) -> list[str]:
    def num(value: float | None) -> str:
        return "" if value is None else repr(value)

    cells = [
        str(row.atom_num), row.atom_name, row.residual_name,
        str(row.residual_num),
        repr(row.x), repr(row.y), repr(row.z), row.atom_type,
        row.residual_accurate_name, row.lineage,
        "1" if row.ac_component else "0",
        row.bound_ab, row.fischer_projection_dl,
        row.reformulated_standard_mono, row.carbon_number_pf,
    ]
    for kind in PATH_KINDS:
        dist = row.mod_distances.get(kind)
        path = row.mod_paths.get(kind, ())
        cells.append("" if dist is None else str(dist))
        cells.append("-".join(path))
    cells.append(num(row.main_ring_shift))
    cells.append(num(row.shift))
    return cells


def import_table(text: str) -> list[AnnotatedRow]:
    """Inverse of export_table. Leading comment lines (# ...) are
    tolerated so artifacts can embed their provenance."""
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    reader = csv.reader(io.StringIO("\n".join(lines)))
    table = list(reader)
    if not table or tuple(table[0]) != CSV_COLUMNS:
        raise CarbshiftError("unexpected feature-table header")
    rows = []
    for cells in table[1:]:
        if not cells:
            continue
        mod_distances: dict[str, int] = {}
        mod_paths: dict[str, tuple[str, ...]] = {}
        for k, kind in enumerate(PATH_KINDS):
            dist_cell = cells[15 + 2 * k]
            path_cell = cells[16 + 2 * k]
            if dist_cell:
                mod_distances[kind] = int(dist_cell)
                mod_paths[kind] = tuple(path_cell.split("-")) if path_cell else ()
        rows.append(AnnotatedRow(
            atom_num=int(cells[0]), atom_name=cells[1],
            residual_name=cells[2], residual_num=int(cells[3]),
            x=float(cells[4]), y=float(cells[5]), z=float(cells[6]),
            atom_type=cells[7], residual_accurate_name=cells[8],
            lineage=cells[9], ac_component=cells[10] == "1",
            bound_ab=cells[11], fischer_projection_dl=cells[12],
            reformulated_standard_mono=cells[13], carbon_number_pf=cells[14],
            mod_distances=mod_distances, mod_paths=mod_paths,
            main_ring_shift=float(cells[25]) if cells[25] else None,
            shift=float(cells[26]) if cells[26] else None,
        ))
    return rows
