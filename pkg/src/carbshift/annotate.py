"""Matching monosaccharides between a structure and its shift table, and
assigning per-atom shift labels.

The matcher aligns the residue linkage graph (from geometry) with the
lineage descriptors in the shift file: every sugar residue gets a path of
parent-attachment positions up to the root of its tree, and records with
the same path are candidates. Residue-code/stem compatibility breaks
ties; remaining automorphic ambiguity resolves by ascending residue
serial against ascending record order, and is logged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .bonds import ResidueLinkageGraph, atom_position_number
from .errors import CountMismatch, LengthMismatch, NoConsistentMatch
from .nomenclature import code_compatibility, record_name_is_sugar
from .shifts import ShiftRecord, ShiftTable, normalize_position_label
from .structure import ResidueRecord, Structure


@dataclass(frozen=True)
class ResidueMatch:
    """Bijection from sugar residue serials to shift-record indices.

    skipped_residues lists non-sugar residues (phosphoryl groups and the
    like); skipped_records lists shift records excluded for the same
    reason. notes records every tie-break the matcher had to take.
    """

    mapping: dict[int, int]
    skipped_residues: tuple[int, ...]
    skipped_records: tuple[int, ...]
    notes: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class AtomShift:
    nucleus: str  # "C" or "H" ("" for modification-group labels)
    value: float
    label: str
    record_index: int


@dataclass(frozen=True)
class UnmatchedLabel:
    record_index: int
    label: str
    value: float


@dataclass(frozen=True)
class LabeledStructure:
    structure: Structure
    labels: dict[int, AtomShift]  # atom serial -> shift
    unmatched: tuple[UnmatchedLabel, ...]
    residue_names: dict[int, str]  # residue serial -> matched mono name
    residue_lineages: dict[int, str]


def residue_is_sugar(res: ResidueRecord) -> bool:
    """A residue is a sugar when it shows the ring-carbon naming pattern:
    at least four distinct C1..C6 carbons plus an oxygen."""
    ring_carbons = set()
    has_oxygen = False
    for atom in res.atoms:
        if atom.element == "C":
            pos = atom_position_number(atom.name)
            if pos is not None and 1 <= pos <= 6:
                ring_carbons.add(pos)
        elif atom.element == "O":
            has_oxygen = True
    return len(ring_carbons) >= 4 and has_oxygen


def parse_lineage_path(lineage: str) -> tuple[int, ...]:
    """Attachment-position path from a record to its root.

    Integer tokens of the comma-separated lineage are the positions,
    nearest parent first; anything else (root markers, names) is ignored.
    """
    path = []
    for token in lineage.split(","):
        token = token.strip()
        if token and token.lstrip("+-").isdigit():
            path.append(int(token))
    return tuple(path)


def _residue_paths(
    lg: ResidueLinkageGraph, sugars: set[int]
) -> dict[int, tuple[int, ...]]:
    parent: dict[int, tuple[int, int]] = {}
    for e in lg.edges:
        if e.child in sugars and e.parent in sugars:
            if e.child in parent and parent[e.child][0] != e.parent:
                raise NoConsistentMatch(
                    f"residue {e.child} has two parents "
                    f"({parent[e.child][0]} and {e.parent})"
                )
            # keep the lowest parent position when one pair is doubly bridged
            if e.child not in parent or e.parent_position < parent[e.child][1]:
                parent[e.child] = (e.parent, e.parent_position)

    paths: dict[int, tuple[int, ...]] = {}
    for serial in sugars:
        path: list[int] = []
        cur = serial
        seen = {serial}
        while cur in parent:
            nxt, q = parent[cur]
            path.append(q)
            cur = nxt
            if cur in seen:
                raise NoConsistentMatch(f"linkage cycle through residue {cur}")
            seen.add(cur)
        paths[serial] = tuple(path)
    return paths


def match_residues(
    s: Structure, lg: ResidueLinkageGraph, st: ShiftTable
) -> ResidueMatch:
    """Match sugar residues to shift records by lineage-path alignment.

    Raises CountMismatch when the sugar counts disagree after skipping
    non-sugar residues/records, NoConsistentMatch when no path-consistent
    bijection exists.
    """
    sugar_res = [r for r in s.residues if residue_is_sugar(r)]
    skipped_res = tuple(r.serial for r in s.residues if not residue_is_sugar(r))
    sugar_rec = [i for i, rec in enumerate(st.records)
                 if record_name_is_sugar(rec.mono_name)]
    skipped_rec = tuple(i for i in range(len(st.records)) if i not in sugar_rec)

    if len(sugar_res) != len(sugar_rec):
        raise CountMismatch(
            f"{s.id or 'structure'}: {len(sugar_res)} sugar residues vs "
            f"{len(sugar_rec)} sugar shift records "
            f"(skipped residues {list(skipped_res)}, records {list(skipped_rec)})"
        )

    res_paths = _residue_paths(lg, {r.serial for r in sugar_res})
    rec_paths = {i: parse_lineage_path(st.records[i].lineage) for i in sugar_rec}

    res_groups: dict[tuple[int, ...], list[ResidueRecord]] = {}
    for r in sorted(sugar_res, key=lambda r: r.serial):
        res_groups.setdefault(res_paths[r.serial], []).append(r)
    rec_groups: dict[tuple[int, ...], list[int]] = {}
    for i in sorted(sugar_rec):
        rec_groups.setdefault(rec_paths[i], []).append(i)

    if set(res_groups) != set(rec_groups) or any(
        len(res_groups[p]) != len(rec_groups[p]) for p in res_groups
    ):
        raise NoConsistentMatch(
            f"{s.id or 'structure'}: linkage paths of the structure "
            f"({_fmt_groups(res_groups)}) do not align with the shift file "
            f"({_fmt_groups({p: v for p, v in rec_groups.items()})})"
        )

    mapping: dict[int, int] = {}
    notes: list[str] = []
    for path in sorted(res_groups):
        residues = res_groups[path]
        candidates = rec_groups[path]
        assigned = _assign_group(residues, candidates, st.records)
        if assigned is None:
            raise NoConsistentMatch(
                f"{s.id or 'structure'}: no stem-consistent assignment for "
                f"linkage path {list(path)}"
            )
        group_map, ambiguous = assigned
        mapping.update(group_map)
        if ambiguous:
            notes.append(
                f"path {list(path) or 'root'}: automorphic group of size "
                f"{len(residues)} resolved by serial order "
                f"({ {r: i for r, i in sorted(group_map.items())} })"
            )

    return ResidueMatch(
        mapping=mapping,
        skipped_residues=skipped_res,
        skipped_records=skipped_rec,
        notes=tuple(notes),
    )


def _fmt_groups(groups: dict) -> str:
    return "; ".join(
        f"{list(path) or 'root'} x{len(members)}"
        for path, members in sorted(groups.items())
    )


def _assign_group(
    residues: list[ResidueRecord],
    candidates: list[int],
    records: tuple[ShiftRecord, ...],
) -> tuple[dict[int, int], bool] | None:
    """Pair residues with records inside one path-equivalence class.

    Prefers compatible residue-code/stem pairs and refuses known
    mismatches unless no mismatch-free bijection exists. Returns the
    mapping plus a flag telling whether a genuine tie had to be broken
    by order.
    """
    compat = {
        (r.serial, i): code_compatibility(r.code, records[i].mono_name)
        for r in residues for i in candidates
    }

    def search(min_compat: int) -> dict[int, int] | None:
        order = sorted(residues, key=lambda r: r.serial)
        used: set[int] = set()
        chosen: dict[int, int] = {}

        def rec(k: int) -> bool:
            if k == len(order):
                return True
            res = order[k]
            ranked = sorted(
                (i for i in candidates if i not in used
                 and compat[(res.serial, i)] >= min_compat),
                key=lambda i: (-compat[(res.serial, i)], i),
            )
            for i in ranked:
                used.add(i)
                chosen[res.serial] = i
                if rec(k + 1):
                    return True
                used.remove(i)
                del chosen[res.serial]
            return False

        return dict(chosen) if rec(0) else None

    result = search(min_compat=1)
    if result is None:
        result = search(min_compat=0)
    if result is None:
        return None
    # a tie existed if two members of the class were interchangeable
    ambiguous = len(residues) > 1 and _has_tie(residues, candidates, compat)
    return result, ambiguous


def _has_tie(residues, candidates, compat) -> bool:
    for a in residues:
        rows = [compat[(a.serial, i)] for i in candidates]
        if len([r for r in rows if r == max(rows)]) > 1:
            return True
    return False


def assign_shifts(
    s: Structure, st: ShiftTable, m: ResidueMatch
) -> LabeledStructure:
    """Assign every matched record's shifts to atoms by normalized name
    equality; labels with no atom accumulate in unmatched."""
    labels: dict[int, AtomShift] = {}
    unmatched: list[UnmatchedLabel] = []
    residue_names: dict[int, str] = {}
    residue_lineages: dict[int, str] = {}
    res_by_serial = {r.serial: r for r in s.residues}

    for res_serial in sorted(m.mapping):
        rec_idx = m.mapping[res_serial]
        record = st.records[rec_idx]
        residue = res_by_serial[res_serial]
        residue_names[res_serial] = record.mono_name
        residue_lineages[res_serial] = record.lineage

        by_name: dict[str, int] = {}
        for atom in residue.atoms:
            by_name.setdefault(normalize_position_label(atom.name), atom.serial)
        for label, value in record.ring_position_shifts.items():
            serial = by_name.get(label)
            if serial is None:
                unmatched.append(UnmatchedLabel(rec_idx, label, value))
                continue
            nucleus = label[0] if label[:1] in ("C", "H") else ""
            labels[serial] = AtomShift(
                nucleus=nucleus, value=value, label=label, record_index=rec_idx
            )

    return LabeledStructure(
        structure=s,
        labels=labels,
        unmatched=tuple(unmatched),
        residue_names=residue_names,
        residue_lineages=residue_lineages,
    )


def filter_low_trust(st: ShiftTable, max_err: float = 2.0) -> ShiftTable:
    """Drop records whose simulation error estimate exceeds max_err ppm.

    Tables without trust flags pass through unchanged; the comparison is
    strictly greater-than, so a record at exactly max_err is kept.
    """
    if not st.trust_flags:
        return st
    keep = [
        rec for rec in st.records
        if st.trust_flags.get(rec.mono_index) is None
        or st.trust_flags[rec.mono_index] <= max_err
    ]
    trust = {
        rec.mono_index: st.trust_flags[rec.mono_index]
        for rec in keep if rec.mono_index in st.trust_flags
    }
    return ShiftTable(
        carbohydrate_id=st.carbohydrate_id,
        records=tuple(keep),
        trust_flags=trust or None,
    )


def outlier_scan(pred: list[float], truth: list[float], k: float) -> list[int]:
    """Indices where |pred - truth| exceeds k times the overall RMSE,
    worst first. A reporting aid; never mutates labels."""
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(truth)} truths")
    if not pred:
        return []
    residuals = [abs(p - t) for p, t in zip(pred, truth)]
    rmse = math.sqrt(sum(r * r for r in residuals) / len(residuals))
    flagged = [i for i, r in enumerate(residuals) if r > k * rmse]
    flagged.sort(key=lambda i: (-residuals[i], i))
    return flagged


def render_match_report(
    s: Structure, st: ShiftTable, match: ResidueMatch,
    labeled: LabeledStructure | None = None,
) -> str:
    """Human-readable per-carbohydrate match report: the mapping table,
    skipped residues/records, unmatched labels, and any remark lines
    (SWECON and friends) carried through from the structure file."""
    res_by_serial = {r.serial: r for r in s.residues}
    lines = [f"match report: {s.id or '(unnamed)'}", ""]

    lines.append("mapping (residue -> shift record):")
    if not match.mapping:
        lines.append("  (none)")
    for serial in sorted(match.mapping):
        idx = match.mapping[serial]
        rec = st.records[idx]
        code = res_by_serial[serial].code
        lines.append(
            f"  residue {serial:>3} {code:<4} -> record {idx:>3} "
            f"{rec.mono_name}  lineage={rec.lineage!r}"
        )

    lines.append("")
    lines.append(f"skipped residues: "
                 f"{[f'{r} ({res_by_serial[r].code})' for r in match.skipped_residues] or 'none'}")
    lines.append(f"skipped records: "
                 f"{[f'{i} ({st.records[i].mono_name})' for i in match.skipped_records] or 'none'}")

    if match.notes:
        lines.append("")
        lines.append("tie-breaks:")
        lines.extend(f"  {note}" for note in match.notes)

    if labeled is not None:
        lines.append("")
        lines.append(f"labeled atoms: {len(labeled.labels)}")
        lines.append(f"unmatched labels: {len(labeled.unmatched)}")
        for u in labeled.unmatched:
            lines.append(
                f"  record {u.record_index} label {u.label} = {u.value} ppm"
            )

    if s.remarks:
        lines.append("")
        lines.append("structure remarks:")
        lines.extend(f"  {r}" for r in s.remarks)

    return "\n".join(lines) + "\n"
