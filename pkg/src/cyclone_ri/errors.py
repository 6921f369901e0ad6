"""Exception hierarchy shared across the pipeline.

The CLI maps these onto exit codes: ``DataError`` subclasses exit 2,
``TrainingDivergedError`` exits 3, ``ConfigError`` exits 1.
"""


class CycloneRIError(Exception):
    pass


class ConfigError(CycloneRIError, ValueError):
    pass


class DataError(CycloneRIError, ValueError):
    pass


class BestTrackParseError(DataError):
    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class DataQualityError(DataError):
    pass


class NumericError(CycloneRIError, ArithmeticError):
    def __init__(self, message, parameter=None):
        self.parameter = parameter
        super().__init__(message)


class TrainingDivergedError(NumericError):
    def __init__(self, epoch, loss=float("nan")):
        self.epoch = epoch
        self.loss = loss
        super().__init__(f"training diverged at epoch {epoch} (loss={loss})")


class BenchmarkError(CycloneRIError):
    pass
