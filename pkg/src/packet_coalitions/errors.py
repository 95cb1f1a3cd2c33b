"""Exception and warning types shared across the package."""


class DegenerateGeometry(ValueError):
    """Coincident nodes or a non-positive link distance."""


class SizeLimit(ValueError):
    """Player count exceeds what exhaustive enumeration supports."""


class InfeasibleWorth(ValueError):
    """A coalition worth needed by the computation is the -inf sentinel."""


class NoCoalition(ValueError):
    """The backbone's reserve value exceeds the saving the coalition can produce."""


class NonConvergence(RuntimeError):
    """The market auction exceeded its round budget."""


class UnknownExperiment(KeyError):
    pass


class ConfigError(ValueError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ZeroSavingWarning(UserWarning):
    """Relays give no measurable power saving, so every alpha is zero."""


class SuperadditivityWarning(UserWarning):
    pass
