"""
Excepciones de Ramiflow.

Cada error lleva un código legible por máquina y el estado de salida que
usa la línea de comandos (2 = fallo de validación, 1 = error).
"""


class RamiflowError(Exception):
    code = "error"
    exit_status = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        return {"error": self.message, "code": self.code, **self.details}


class ValidationError(RamiflowError):
    exit_status = 2


class InvalidMeasure(ValidationError):
    code = "invalid_measure"


class MassImbalance(ValidationError):
    code = "mass_imbalance"


class OutOfDomain(ValidationError):
    code = "out_of_domain"


class DomainError(ValidationError):
    code = "domain_error"


class InvalidCost(ValidationError):
    code = "invalid_cost"


class InvalidGraph(ValidationError):
    code = "invalid_graph"


class ConservationViolation(ValidationError):
    code = "conservation_violation"


class NonConcaveCost(RamiflowError):
    code = "non_concave_cost"


class CyclicGraph(RamiflowError):
    code = "cyclic_graph"


class BoundViolation(RamiflowError):
    code = "bound_violation"


class TooLarge(RamiflowError):
    code = "too_large"


class UnsupportedDimension(RamiflowError):
    code = "unsupported_dimension"


class ConfigError(ValidationError):
    code = "config_error"


class ReproMismatch(RamiflowError):
    code = "repro_mismatch"
