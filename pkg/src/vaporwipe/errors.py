"""Exception hierarchy shared by all vaporwipe modules."""


class VaporWipeError(Exception):
    """Base class for every error raised by this package."""


class InfeasibleLength(VaporWipeError):
    """Measured footprint length is shorter than the sprayed trajectory allows."""


class DegenerateArc(VaporWipeError):
    """Arc viewpoint requested around an anchor at (near-)zero radius."""


class SprayOutOfRange(VaporWipeError):
    """Standoff exceeds the maximum distance at which mist deposits."""


class SurfaceTooThick(VaporWipeError):
    """Target plate is too thick for mist to condense on it."""


class UnderDeposited(VaporWipeError):
    """One-way spray pass too short; the misted area is effectively empty."""


class DegenerateView(VaporWipeError):
    """Camera placement projects the target plane to zero area."""


class NoForeground(VaporWipeError):
    """Segmentation found no qualifying pixels inside the seed rectangle."""


class MaskTooSmall(VaporWipeError):
    """Extracted mask area is below the measurement minimum."""


class EmptyTruth(VaporWipeError):
    """F-score requested against a truth mask with no positive pixels."""


class BudgetExceeded(VaporWipeError):
    """Planned arc traverse violates the completion-time budget."""


class MistEvaporated(VaporWipeError):
    """Mist visibility reached zero before the sweep finished."""


class ZeroInitialPixels(VaporWipeError):
    """Unwiped-area metric called with no initial stain pixels."""


class EmptyInput(VaporWipeError):
    """Aggregate requested over an empty sequence."""


class ImageLoadError(VaporWipeError):
    """Background or corpus image could not be read."""


class ConfigError(VaporWipeError):
    """Experiment configuration is missing or inconsistent."""
