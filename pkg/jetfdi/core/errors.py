# ========================================
# FileName: errors.py
# Brief: Exceptions raised by the jetfdi core.
# =========================================


class JetFDIError(Exception):
    """Root of every error raised by jetfdi."""


# Engine model
class ModelDomainError(JetFDIError, ValueError):
    """A component relation was asked for a non-physical condition."""

    def __init__(self, station, message):
        self.station = station
        super().__init__(f"station {station}: {message}")
        self.message = message

    def __reduce__(self):
        return (type(self), (self.station, self.message))


class SingularityError(JetFDIError, ZeroDivisionError):
    """Shaft speed reached zero in the rotor dynamics."""


class IntegrationError(JetFDIError, ArithmeticError):
    """The state left its admissible domain after an integration step."""

    def __init__(self, message, dt=None, state=None, derivative=None):
        self.message = message
        self.dt = dt
        self.state = state
        self.derivative = derivative
        details = []
        if dt is not None:
            details.append(f"dt={dt}")
        if state is not None:
            details.append(f"state={state}")
        if derivative is not None:
            details.append(f"derivative={derivative}")
        if details:
            message = message + " (" + ", ".join(details) + ")"
        super().__init__(message)

    def __reduce__(self):
        return (type(self), (self.message, self.dt, self.state,
                             self.derivative))


class SimulationError(JetFDIError):
    """An integration failure annotated with the simulation time."""

    def __init__(self, t, cause):
        self.t = t
        self.cause = cause
        super().__init__(f"simulation failed at t={t:.3f} s: {cause}")

    def __reduce__(self):
        return (type(self), (self.t, self.cause))


class SteadyStateError(JetFDIError, ArithmeticError):
    """The equilibrium solver did not converge."""

    def __init__(self, message, residual):
        self.message = message
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")

    def __reduce__(self):
        return (type(self), (self.message, self.residual))


# Faults
class FaultSpecError(JetFDIError, ValueError):
    """Invalid fault description."""


class FaultScheduleError(JetFDIError, ValueError):
    """Invalid fault schedule."""


class FaultMisuseError(JetFDIError, TypeError):
    """A sensor fault was applied to an actuator or the reverse."""


# Data
class DataQualityError(JetFDIError, ValueError):
    """Too many samples had to be discarded."""


class StratificationError(JetFDIError, ValueError):
    """A class is too small for the requested number of folds."""


class LabelError(JetFDIError, IndexError):
    """A label lies outside the declared class set."""


class ShapeError(JetFDIError, ValueError):
    """Feature dimensions do not match."""


# Classifiers
class ConfigurationError(JetFDIError, ValueError):
    """Invalid hyperparameters or configuration file."""


class NumericalError(JetFDIError, ArithmeticError):
    """A matrix could not be inverted."""


class DivergenceError(JetFDIError, ArithmeticError):
    """An iterative fit produced a non-finite loss."""


class ModelLoadError(JetFDIError, IOError):
    """A persisted model could not be restored."""


# Runtime
class BankError(JetFDIError, ValueError):
    """Invalid classifier bank."""


class StreamError(JetFDIError):
    """The telemetry stream could not be processed."""


class NonFiniteSampleError(JetFDIError, ValueError):
    """A telemetry sample holds NaN or infinite values."""


class RunGenerationError(JetFDIError):
    """A dataset run could not be simulated."""

    def __init__(self, run_id, cause):
        self.run_id = run_id
        self.cause = cause
        super().__init__(f"run {run_id}: {cause}")

    def __reduce__(self):
        return (type(self), (self.run_id, self.cause))


class CrossValidationError(JetFDIError):
    """A classifier fit failed inside a cross-validation fold."""

    def __init__(self, fold, cause):
        self.fold = fold
        self.cause = cause
        super().__init__(f"fold {fold}: {cause}")

    def __reduce__(self):
        return (type(self), (self.fold, self.cause))
