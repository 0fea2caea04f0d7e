"""Monosaccharide name grammar.

Shift files carry names like "b-D-Glcp", "aLFucp", "a-D-Neup5Ac" or
"B-D-GLCPN" depending on the source. The grammar here is intentionally
tolerant: optional anomer letter, optional Fischer configuration letter,
a stem token, optional ring-size letter, then modification suffixes.
Anything that fails to parse lands in the explicit N/A buckets rather
than raising, because inconsistent naming is the norm in this data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

# categorical domains used by the feature encoder
ANOMERS = ("a", "b", "N/A")
CONFIGURATIONS = ("D", "L", "N/A")
RING_SIZES = ("p", "f", "N/A")
STEMS = ("Gal", "Glc", "Man", "Fuc", "Xyl", "Rha", "GlcNAc", "GlcA", "GalA",
         "Kdo", "Neu", "Ara", "ManA", "GalN", "Other", "N/A")
MODIFICATION_KINDS = ("Ac", "Me", "S", "Gc", "Ser", "Deoxy")

# stems recognized by the grammar; ones outside the encoder domain fold
# into "Other"
_KNOWN_STEMS = (
    "Glc", "Gal", "Man", "Fuc", "Xyl", "Rha", "Kdo", "Neu", "Ara",
    "Rib", "Lyx", "All", "Alt", "Gul", "Ido", "Tal", "Qui", "Api",
    "Fru", "Sor", "Tag", "Psi", "Abe", "Tyv", "Hep", "Leg", "Pse",
    "Mur", "Bac", "Kdn", "Col", "Par", "Dig",
)

# ring-position extent per stem: positions above it belong to
# substituents, not the main ring numbering
_RING_EXTENT = {"Neu": 9, "Kdn": 9, "Leg": 9, "Pse": 9, "Kdo": 8, "Hep": 7}
DEFAULT_RING_EXTENT = 6

# residue codes of non-sugar groups that appear as pseudo-residues
NON_SUGAR_CODES = {
    "PO3": None, "PO4": None, "PO2": None, "P": None,
    "SO3": "S", "SO4": "S", "SGN": "S",
    "ACX": "Ac", "ACY": "Ac", "ACT": "Ac", "ACE": "Ac",
    "MEX": "Me", "OME": "Me", "MET": "Me",
    "NGC": "Gc",
    "SER": "Ser",
    "ETN": None, "HOH": None, "WAT": None,
}

# 3-letter PDB residue codes with a known stem, used only as a matching
# tie-breaker
_CODE_ALIASES = {
    "GLC": "Glc", "BGC": "Glc", "AGC": "Glc",
    "GAL": "Gal", "GLA": "Gal", "GXL": "Gal",
    "MAN": "Man", "BMA": "Man",
    "FUC": "Fuc", "FUL": "Fuc", "FCA": "Fuc", "FCB": "Fuc",
    "XYL": "Xyl", "XYS": "Xyl", "XYP": "Xyl",
    "RAM": "Rha", "RHA": "Rha",
    "NAG": "GlcNAc", "NDG": "GlcNAc", "NGA": "GalN", "A2G": "GalN",
    "GCU": "GlcA", "BDP": "GlcA", "ADA": "GalA", "GTR": "GalA",
    "KDO": "Kdo", "SIA": "Neu", "SLB": "Neu", "NEU": "Neu",
    "ARA": "Ara", "ARB": "Ara",
    "GCS": "GlcN", "GCN": "GlcN",
}

# modification suffix tokens in scan order (longest first); None marks
# stem-only suffixes that imply no tracked modification kind
_LONG_SUFFIXES = (
    ("NAC", "Ac"), ("NGC", "Gc"), ("OAC", "Ac"), ("OME", "Me"),
    ("OSO3", "S"), ("SO3", "S"), ("DEOXY", "Deoxy"), ("SER", "Ser"),
    ("AC", "Ac"), ("GC", "Gc"), ("ME", "Me"),
)
# single letters are only trusted in uppercase when the name is mixed-case
_SHORT_SUFFIXES = (("N", None), ("A", None), ("S", "S"), ("D", "Deoxy"),
                   ("P", None))


@dataclass(frozen=True)
class MonoName:
    """Parsed monosaccharide name; every field falls back to "N/A"."""

    anomer: str = "N/A"
    configuration: str = "N/A"
    stem: str = "N/A"
    ring_size: str = "N/A"
    modifications: frozenset[str] = field(default_factory=frozenset)
    base_stem: str = "N/A"  # stem before composite reformulation


def _compact(name: str) -> str:
    return "".join(ch for ch in name if ch not in "-_ ()[]")


def parse_mono_name(name: str) -> MonoName:
    """Parse a monosaccharide full name into its categorical features.

    "b-D-Glcp" -> anomer b, configuration D, stem Glc, ring size p.
    Composite stems are reformulated when the combination is in the
    encoder domain (Glc + NAc -> GlcNAc); otherwise the base stem stands.
    """
    text = _compact(name.strip())
    upper = text.upper()
    mixed_case = text != upper and text != text.lower()
    pos = 0

    anomer = "N/A"
    if pos < len(upper) and upper[pos] in "ABX" and _stem_at(upper, pos) is None:
        anomer = {"A": "a", "B": "b", "X": "N/A"}[upper[pos]]
        pos += 1

    configuration = "N/A"
    if pos < len(upper) and upper[pos] in "DL" and _stem_at(upper, pos) is None:
        configuration = upper[pos]
        pos += 1

    base = _stem_at(upper, pos)
    if base is None:
        return MonoName(anomer=anomer, configuration=configuration)
    pos += len(base)

    ring_size = "N/A"
    if pos < len(text):
        ch = text[pos]
        if ch in ("p", "f", "P", "F") and (not mixed_case or ch.islower()):
            ring_size = ch.lower()
            pos += 1
        elif ch == "a" and mixed_case:
            pos += 1  # acyclic marker; stays N/A

    tokens, mods = _scan_suffixes(text[pos:], mixed_case)
    stem = _reformulate(base, tokens)
    base_domain = base if base in STEMS else "Other"
    return MonoName(
        anomer=anomer,
        configuration=configuration,
        stem=stem,
        ring_size=ring_size,
        modifications=frozenset(mods),
        base_stem=base_domain,
    )


def _stem_at(upper: str, pos: int) -> str | None:
    for stem in _KNOWN_STEMS:
        if upper.startswith(stem.upper(), pos):
            return stem
    return None


def _scan_suffixes(tail: str, mixed_case: bool) -> tuple[list[str], set[str]]:
    tokens: list[str] = []
    mods: set[str] = set()
    upper = tail.upper()
    i = 0
    while i < len(upper):
        if not upper[i].isalpha():
            i += 1
            continue
        for token, kind in _LONG_SUFFIXES:
            if upper.startswith(token, i):
                tokens.append(token)
                if kind:
                    mods.add(kind)
                i += len(token)
                break
        else:
            matched = False
            for token, kind in _SHORT_SUFFIXES:
                if upper.startswith(token, i) and (not mixed_case or tail[i].isupper()):
                    tokens.append(token)
                    if kind:
                        mods.add(kind)
                    i += 1
                    matched = True
                    break
            if not matched:
                i += 1  # unknown character, skip
    return tokens, mods


def _reformulate(base: str, tokens: list[str]) -> str:
    for token, suffix in (("NAC", "NAc"), ("N", "N"), ("A", "A")):
        if token in tokens:
            candidate = base + suffix
            if candidate in STEMS:
                return candidate
            if token == "NAC" and base + "N" in STEMS:
                return base + "N"  # GalNAc folds into the GalN bucket
    return base if base in STEMS else "Other"


def ring_extent(stem: str) -> int:
    """Highest main-ring position number for a stem."""
    return _RING_EXTENT.get(stem, DEFAULT_RING_EXTENT)


def code_compatibility(code: str, record_name: str) -> int:
    """Soft compatibility between a 3-letter residue code and a record's
    full monosaccharide name, used only to break matching ties.

    3 = alias agrees with the reformulated stem, 2 = base stems agree,
    1 = nothing known, 0 = known to disagree.
    """
    code = code.strip().upper()
    parsed = parse_mono_name(record_name)
    alias = _CODE_ALIASES.get(code)
    if alias is not None:
        if alias == parsed.stem:
            return 3
        if parsed.base_stem != "N/A" and alias[:3].upper() == parsed.base_stem[:3].upper():
            return 2
        return 0
    if parsed.base_stem not in ("N/A", "Other") and code.startswith(parsed.base_stem[:3].upper()):
        return 2
    return 1


def record_name_is_sugar(name: str) -> bool:
    """Non-sugar pseudo-residues (phosphoryl groups etc.) fail the stem
    grammar or sit in the known-group list."""
    compact = _compact(name.strip()).upper()
    if compact in NON_SUGAR_CODES:
        return False
    return parse_mono_name(name).stem != "N/A"
