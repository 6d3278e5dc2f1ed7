"""Exception hierarchy shared by all presmon modules.

ValidationError subclasses map to CLI exit code 2 and HTTP 4xx in the
service; everything else propagates as an ordinary failure.
"""


class PresmonError(Exception):
    """Base class for all presmon errors."""


class ValidationError(PresmonError):
    """Bad input from the user (file, config, request)."""


class MissingColumn(ValidationError):
    def __init__(self, column):
        super().__init__(f"required column missing: {column!r}")
        self.column = column


class UnparseableTimestamp(ValidationError):
    def __init__(self, row, value):
        super().__init__(f"cannot parse timestamp {value!r} at row {row}")
        self.row = row
        self.value = value


class EmptyLog(ValidationError):
    pass


class MalformedXml(ValidationError):
    pass


class MissingConceptName(ValidationError):
    pass


class MissingLabelAttribute(ValidationError):
    def __init__(self, case_id):
        super().__init__(f"trace {case_id!r} has no label attribute")
        self.case_id = case_id


class EmptySplit(ValidationError):
    pass


class LtlfSyntaxError(ValidationError):
    def __init__(self, position, expected, text=""):
        super().__init__(f"LTLf syntax error at position {position}: expected {expected}")
        self.position = position
        self.expected = expected
        self.text = text


class InvalidStats(PresmonError):
    """No runtime-verification criteria row matched; indicates a counting bug."""


class EmptyUniverse(ValidationError):
    pass


class DegenerateData(PresmonError):
    """Training data contains a single class (warning condition)."""


class WidthMismatch(ValidationError):
    pass


class NoPositivePath(PresmonError):
    """The decision tree has no positive path surviving the sample filter."""
