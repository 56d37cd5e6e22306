"""Exception types shared across the package."""


class CgschedError(Exception):
    """Base class for all package errors."""


class MalformedNameError(CgschedError, ValueError):
    """Instance name does not match the <m>M<n>N_<seed>_<init> pattern."""


class InstanceParseError(CgschedError, ValueError):
    """Instance file is syntactically or structurally invalid."""


class InvariantViolation(CgschedError):
    """A data invariant was broken (corrupt input or internal bug)."""


class PricingSizeError(CgschedError, ValueError):
    """Brute-force pricing requested beyond the enumeration guard."""


class WeightFormatError(CgschedError, ValueError):
    """Weight file violates the NNCG1 container format."""


class WeightChecksumError(WeightFormatError):
    """Weight payload failed CRC verification (corrupt or truncated)."""


class WeightShapeError(WeightFormatError):
    """Tensor shapes disagree with the declared model configuration."""


class MissingTensorError(WeightFormatError):
    """A tensor required by the model configuration is absent."""
