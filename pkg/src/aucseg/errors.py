"""Exception types shared across the package.

Two families: :class:`DataError` for anything wrong with input files or
their contents, and :class:`ComputeError` for requests that are undefined
for otherwise valid data (no positive examples, zero variance, and so on).
The command-line interface maps them to exit codes 2 and 3 respectively.
"""


class AucSegError(Exception):
    """Base class for every error raised by this package."""


class DataError(AucSegError):
    """Input data could not be loaded or validated."""


class MissingColumn(DataError):
    def __init__(self, name):
        super().__init__(f"unknown column or feature: {name!r}")
        self.name = name


class UnparseableValue(DataError):
    def __init__(self, row, column, value):
        super().__init__(f"row {row}, column {column!r}: cannot parse {value!r}")
        self.row = row
        self.column = column
        self.value = value


class LabelNotBinary(DataError):
    def __init__(self, row, value):
        super().__init__(f"row {row}: label must be 0 or 1, got {value!r}")
        self.row = row
        self.value = value


class ScoreOutOfRange(DataError):
    def __init__(self, row, model, value):
        super().__init__(f"row {row}: score for model {model!r} is outside [0, 1]: {value!r}")
        self.row = row
        self.model = model
        self.value = value


class EmptyDataset(DataError):
    def __init__(self, message="dataset has no records"):
        super().__init__(message)


class ComputeError(AucSegError):
    """The requested computation is undefined for the given data."""


class UnknownModel(ComputeError):
    def __init__(self, model, known):
        super().__init__(f"unknown model {model!r}; registered models: {sorted(known)}")
        self.model = model


class DegenerateLabels(ComputeError):
    def __init__(self, p, n):
        super().__init__(
            f"need at least one positive and one negative example, got p={p}, n={n}"
        )
        self.p = p
        self.n = n


class ZeroVariance(ComputeError):
    def __init__(self, message="input has zero variance"):
        super().__init__(message)


class LengthMismatch(ComputeError):
    def __init__(self, message):
        super().__init__(message)


class NonCategoricalFeature(ComputeError):
    def __init__(self, feature):
        super().__init__(
            f"feature {feature!r} is numeric; pass bins to partition it into categories"
        )
        self.feature = feature


class TooFewRecords(ComputeError):
    def __init__(self, needed, got):
        super().__init__(f"need at least {needed} rows, got {got}")
        self.needed = needed
        self.got = got
