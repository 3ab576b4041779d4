"""Exception hierarchy shared by every module of the package."""


class ChannelModelError(ValueError):
    """Base class for domain errors raised by :mod:`invivo_channel`."""


class DepthBelowReference(ChannelModelError):
    pass


class ExtrapolationRequired(ChannelModelError):
    pass


class InvalidAngle(ChannelModelError):
    pass


class InvalidPermittivity(ChannelModelError):
    pass


class InsufficientSamples(ChannelModelError):
    pass


class DegenerateDesign(ChannelModelError):
    pass


class InvalidStep(ChannelModelError):
    pass


class NonConvergence(ChannelModelError):
    pass


class ParseError(ChannelModelError):
    """Malformed CSV input. ``line`` is 1-based and counts the header."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownRegion(ParseError):
    pass


class UnknownZone(ParseError):
    pass


class DuplicatePoint(ParseError):
    pass


class MissingCell(ChannelModelError):
    def __init__(self, cells):
        self.cells = list(cells)
        shown = ", ".join(str(c) for c in self.cells[:10])
        more = "" if len(self.cells) <= 10 else f" (+{len(self.cells) - 10} more)"
        super().__init__(f"missing cells: {shown}{more}")


class InsufficientAngles(ChannelModelError):
    pass


class InvalidConfig(ChannelModelError):
    pass


class NoFeasibleDepth(ChannelModelError):
    pass
