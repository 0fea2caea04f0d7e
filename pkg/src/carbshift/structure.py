"""Reading and writing the carbohydrate PDB dialect.

Structure files arrive from two pipelines with slightly different habits
(ATOM vs HETATM records, blank element columns, occasional misaligned
columns), so the parser is deliberately forgiving: fixed columns first,
whitespace tokens as a fallback, element inferred from the atom name when
the element column is blank.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DuplicateSerial, EmptyStructure, MalformedRecord

_COORD_FMT = "{:8.3f}"


@dataclass(frozen=True)
class Atom:
    """One atom record: serial, name ("C1", "H61", ...), element symbol,
    parent residue serial, and coordinates in Angstrom."""

    serial: int
    name: str
    element: str
    residue_serial: int
    coord: tuple[float, float, float]


@dataclass(frozen=True)
class ResidueRecord:
    """A residue (monosaccharide or other group) as grouped in the file."""

    serial: int
    code: str
    atoms: tuple[Atom, ...]


@dataclass(frozen=True)
class Structure:
    """A parsed structure file.

    connect_pairs holds unordered atom-serial pairs from CONECT records,
    stored with the smaller serial first. remarks holds every line the
    parser did not interpret (e.g. SWECON annotations), verbatim, for
    downstream reporting.
    """

    id: str
    atoms: tuple[Atom, ...]
    residues: tuple[ResidueRecord, ...]
    connect_pairs: frozenset[tuple[int, int]]
    remarks: tuple[str, ...] = field(default=())

    def atom_by_serial(self, serial: int) -> Atom:
        idx = self.__dict__.get("_serial_cache")
        if idx is None:
            idx = {a.serial: a for a in self.atoms}
            object.__setattr__(self, "_serial_cache", idx)
        return idx[serial]


def _element_from_name(name: str) -> str:
    for ch in name:
        if ch.isalpha():
            return ch.upper()
    return ""


def _parse_float(text: str, line_no: int, what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise MalformedRecord(f"line {line_no}: bad {what} field {text!r}")
    if value != value or value in (float("inf"), float("-inf")):
        raise MalformedRecord(f"line {line_no}: non-finite {what} {text!r}")
    return value


def _is_int(token: str) -> bool:
    try:
        int(token)
        return True
    except ValueError:
        return False


def _atom_from_columns(line: str, line_no: int) -> tuple[Atom, str] | None:
    """Fixed-column read per the PDB layout; None when the columns are
    unusable but the line might still split on whitespace."""
    if len(line) < 54:
        return None
    try:
        serial = int(line[6:11])
        res_serial = int(line[22:26])
    except ValueError:
        return None
    name = line[12:16].strip()
    code = line[17:20].strip()
    if not name or not code:
        return None
    try:
        x = _parse_float(line[30:38].strip(), line_no, "x")
        y = _parse_float(line[38:46].strip(), line_no, "y")
        z = _parse_float(line[46:54].strip(), line_no, "z")
    except MalformedRecord:
        return None
    element = line[76:78].strip() if len(line) >= 77 else ""
    if not element.isalpha():
        element = _element_from_name(name)
    return Atom(serial, name, element.upper(), res_serial, (x, y, z)), code


def _atom_from_tokens(line: str, line_no: int) -> tuple[Atom, str]:
    """Whitespace fallback for misaligned files.

    Expects record, serial, name, resName, [chain], resSeq, x, y, z,
    [element]."""
    tokens = line.split()
    if len(tokens) < 8:
        raise MalformedRecord(f"line {line_no}: too few fields: {line!r}")
    if not _is_int(tokens[1]):
        raise MalformedRecord(f"line {line_no}: bad serial {tokens[1]!r}")
    serial = int(tokens[1])
    name = tokens[2]
    code = tokens[3]
    rest = tokens[4:]
    if not _is_int(rest[0]) and len(rest) >= 5 and _is_int(rest[1]):
        rest = rest[1:]  # skip chain id
    if not _is_int(rest[0]):
        raise MalformedRecord(f"line {line_no}: bad residue number {rest[0]!r}")
    res_serial = int(rest[0])
    if len(rest) < 4:
        raise MalformedRecord(f"line {line_no}: missing coordinates")
    x = _parse_float(rest[1], line_no, "x")
    y = _parse_float(rest[2], line_no, "y")
    z = _parse_float(rest[3], line_no, "z")
    element = rest[-1] if len(rest) > 4 and rest[-1].isalpha() else ""
    if not element:
        element = _element_from_name(name)
    return Atom(serial, name, element.upper(), res_serial, (x, y, z)), code


def _parse_conect(line: str, line_no: int) -> list[int]:
    serials: list[int] = []
    body = line[6:].rstrip()
    fields = [body[i : i + 5].strip() for i in range(0, len(body), 5)]
    if all(_is_int(f) for f in fields if f):
        return [int(f) for f in fields if f]
    # loosely written files: plain whitespace-separated serials
    for tok in line.split()[1:]:
        if not _is_int(tok):
            raise MalformedRecord(f"line {line_no}: bad CONECT field {tok!r}")
        serials.append(int(tok))
    return serials


def parse_pdb(text: str, structure_id: str = "") -> Structure:
    """Parse ATOM/HETATM/CONECT records into a Structure.

    ATOM and HETATM are treated identically. Residues are grouped by
    (resName, resSeq) in order of first appearance. Only the first MODEL
    block of a multi-model file is read. Unrecognized lines are kept
    verbatim in Structure.remarks.

    Raises MalformedRecord, DuplicateSerial, or EmptyStructure.
    """
    atoms: list[Atom] = []
    codes: list[str] = []
    seen_serials: set[int] = set()
    connect: set[tuple[int, int]] = set()
    remarks: list[str] = []
    models_seen = 0

    for line_no, raw in enumerate(text.splitlines(), start=1):
        record = raw[:6].strip().upper()
        if record in ("ATOM", "HETATM"):
            parsed = _atom_from_columns(raw, line_no)
            if parsed is None:
                parsed = _atom_from_tokens(raw, line_no)
            atom, code = parsed
            if atom.serial in seen_serials:
                raise DuplicateSerial(
                    f"line {line_no}: serial {atom.serial} repeated"
                )
            seen_serials.add(atom.serial)
            atoms.append(atom)
            codes.append(code)
        elif record == "CONECT":
            serials = _parse_conect(raw, line_no)
            if len(serials) >= 2:
                a = serials[0]
                for b in serials[1:]:
                    if a != b:
                        connect.add((min(a, b), max(a, b)))
        elif record == "MODEL":
            models_seen += 1
            if models_seen > 1:
                break
        elif record == "ENDMDL":
            break  # first model only
        elif record in ("TER", "END"):
            continue
        elif raw.strip():
            remarks.append(raw)

    if not atoms:
        raise EmptyStructure(f"{structure_id or 'input'}: no atoms")
    for a, b in connect:
        missing = a if a not in seen_serials else b
        if missing not in seen_serials:
            raise MalformedRecord(f"CONECT references unknown serial {missing}")

    grouped: dict[tuple[str, int], list[Atom]] = {}
    order: list[tuple[str, int]] = []
    for atom, code in zip(atoms, codes):
        key = (code, atom.residue_serial)
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(atom)
    residues = tuple(
        ResidueRecord(serial=serial, code=code, atoms=tuple(grouped[(code, serial)]))
        for code, serial in order
    )

    return Structure(
        id=structure_id,
        atoms=tuple(atoms),
        residues=residues,
        connect_pairs=frozenset(connect),
        remarks=tuple(remarks),
    )


def serialize_structure(s: Structure) -> str:
    """Render a Structure back to PDB text.

    Coordinates are written at the PDB precision of three decimals;
    parse_pdb(serialize_structure(s)) reproduces s field for field for
    any structure whose coordinates carry at most that precision.
    """
    lines: list[str] = list(s.remarks)
    code_by_atom: dict[int, str] = {}
    for res in s.residues:
        for atom in res.atoms:
            code_by_atom[atom.serial] = res.code
    for atom in s.atoms:
        name = atom.name if len(atom.name) >= 4 else f" {atom.name:<3}"
        code = code_by_atom.get(atom.serial, "UNK")
        x, y, z = (_COORD_FMT.format(c) for c in atom.coord)
        lines.append(
            f"ATOM  {atom.serial:>5} {name:<4} {code:<3}  {atom.residue_serial:>4}"
            f"    {x}{y}{z}  1.00  0.00          {atom.element:>2}"
        )
    for a, b in sorted(s.connect_pairs):
        lines.append(f"CONECT{a:>5}{b:>5}")
    lines.append("END")
    return "\n".join(lines) + "\n"
