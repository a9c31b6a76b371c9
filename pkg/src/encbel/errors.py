"""Exception hierarchy shared by every module."""


class EncError(Exception):
    """Base class for all errors raised by encbel."""


class ScopeMismatchError(EncError, ValueError):
    pass


class InvalidPartitionError(EncError, ValueError):
    pass


class NotABeliefFunctionError(EncError, ValueError):
    """Masses out of range, or a transform image whose inversion is negative."""


class TotalConflictError(EncError, ValueError):
    pass


class InvalidFamilyError(EncError, ValueError):
    pass


class ResourceCapError(EncError, RuntimeError):
    """A product space, focal-set product or dense transform exceeds its cap."""


class MustMergeError(EncError, ValueError):
    """Polytree propagation was asked to run on a skeleton with loops."""


class PreconditionError(EncError, ValueError):
    """A specialised routine (partition, shortcut) does not apply."""


class NetworkValidationError(EncError, ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class MissingEntryError(EncError, KeyError):
    pass
