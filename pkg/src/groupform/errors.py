"""Exception types raised by the group formation engine."""


class GroupFormationError(Exception):
    """Base class for all library errors."""


class GeometryError(GroupFormationError, ValueError):
    pass


class ModelError(GroupFormationError, ValueError):
    pass


class PreconditionError(GroupFormationError):
    """An operation was called outside the premises it is defined under."""


class ConstructionError(GroupFormationError):
    """A DAG realization stage failed.

    ``stage`` names the pipeline step (layout, pad, resources, verify).
    """

    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class InstanceFormatError(GroupFormationError, ValueError):
    """Instance file does not match the schema.

    ``pointer`` is a JSON pointer to the offending field.
    """

    def __init__(self, pointer: str, message: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
