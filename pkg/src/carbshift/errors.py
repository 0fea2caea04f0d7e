"""Exception hierarchy for the carbshift pipeline.

Every error raised by the library derives from CarbshiftError so callers
(notably the CLI) can distinguish pipeline failures from programming bugs.
"""


class CarbshiftError(Exception):
    """Base class for all carbshift errors."""


# structure parsing

class MalformedRecord(CarbshiftError):
    """An ATOM/HETATM/CONECT line could not be parsed."""


class EmptyStructure(CarbshiftError):
    """A structure file contained no atoms."""


class DuplicateSerial(CarbshiftError):
    """Two atoms in one file share a serial number."""


# shift-table parsing

class NoRecords(CarbshiftError):
    """A shift file yielded no usable shift values."""


class UnparseableShift(CarbshiftError):
    """A non-empty shift cell is not a number, or falls outside the
    physical sanity window."""


class InconsistentResidues(CarbshiftError):
    """The carbon and hydrogen shift files disagree on the
    monosaccharide list."""


# matching

class CountMismatch(CarbshiftError):
    """Sugar residue count differs from sugar shift-record count."""


class NoConsistentMatch(CarbshiftError):
    """Tree alignment found no bijection consistent with the linkage
    annotations."""


# graphs and models

class NoPath(CarbshiftError):
    """Breadth-first search found no route to any target atom."""


class LengthMismatch(CarbshiftError):
    """Paired vectors have different lengths."""


class ShapeMismatch(CarbshiftError):
    """Model parameter shapes do not chain with the input."""


class EmptyMask(CarbshiftError):
    """Loss requested over a graph with no labeled nodes."""


class NoLabeledNodes(CarbshiftError):
    """Training set contains no labeled nodes for the chosen target."""


class EmptyTrainingSet(CarbshiftError):
    """Forest training received zero rows."""


class UnknownFeatureName(CarbshiftError):
    """A feature name passed to the encoder/ablation is not known."""


class SchemaMismatch(CarbshiftError):
    """A checkpoint was asked to predict on a different feature schema
    than it was trained with."""
