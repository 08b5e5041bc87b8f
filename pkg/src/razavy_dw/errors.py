"""Exception hierarchy shared by all razavy_dw modules."""


class RazavyError(Exception):
    """Base class for every error raised by this package."""


class NonConvergence(RazavyError):
    """A numerical kernel exhausted its budget before meeting its tolerance."""


class BracketInvalid(RazavyError, ValueError):
    pass


class InvalidParams(RazavyError, ValueError):
    pass


class GridInvalid(RazavyError, ValueError):
    pass


class UnknownPreset(RazavyError, KeyError):
    def __str__(self):
        # KeyError quotes its argument; keep the message readable
        return str(self.args[0]) if self.args else ""


class DegenerateSpec(RazavyError, ValueError):
    """The wavepacket occupies a single energy level, so Γ(t) ≡ 1."""


class DegenerateSpecWarning(UserWarning):
    pass
