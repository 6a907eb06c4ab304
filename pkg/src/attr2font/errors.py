"""Exception types shared across the attr2font package."""


class Attr2FontError(Exception):
    """Base class for all attr2font errors."""


# dataset / rendering
class MissingGlyph(Attr2FontError):
    """Requested character is not covered by the font file."""


class UnreadableFont(Attr2FontError):
    """Font file could not be parsed."""


class BadRowLength(Attr2FontError, ValueError):
    """Annotation row does not carry exactly one value per attribute."""


class OutOfRange(Attr2FontError, ValueError):
    """Raw annotation value outside the accepted [0, 100] range."""


class DuplicateFontId(Attr2FontError, ValueError):
    """The same font id appears twice in an annotation file."""


class EmptyDataset(Attr2FontError):
    """Operation requires at least one font."""


class InconsistentCharset(Attr2FontError):
    """A font does not provide every character of the dataset charset."""


class NoFonts(Attr2FontError):
    """No ingestible fonts found under the given directory."""


# tensor contracts
class ShapeMismatch(Attr2FontError, ValueError):
    """Array/tensor arguments disagree in shape."""


class WrongRefCount(Attr2FontError, ValueError):
    """Number of style reference glyphs differs from the configured m."""


class WrongResolution(Attr2FontError, ValueError):
    """Image resolution differs from the model configuration."""


class ZeroSize(Attr2FontError, ValueError):
    """Requested spatial size has a zero dimension."""


# inference
class IndexOutOfRange(Attr2FontError, IndexError):
    """Attribute or character index outside its valid range."""


class ValueOutOfRange(Attr2FontError, ValueError):
    """Attribute value outside [0, 1]."""


class LambdaOutOfRange(Attr2FontError, ValueError):
    """Interpolation coefficient outside [0, 1]."""


# metrics
class EmptySet(Attr2FontError, ValueError):
    """Point-set distance requires both sets to be nonempty."""


# training / checkpointing
class NonFiniteLoss(Attr2FontError, RuntimeError):
    """A loss term became NaN or infinite during training."""


class CorruptCheckpoint(Attr2FontError):
    """Checkpoint file failed integrity or format checks."""


class ConfigMismatch(Attr2FontError):
    """Checkpoint was produced under an incompatible model configuration."""
