"""Exception hierarchy.

Every error carries the name of the module that raised it so the CLI can
print a one-line machine-readable diagnostic.
"""


class ToralError(ValueError):
    module = "toralclt"

    def to_dict(self):
        return {"error": type(self).__name__, "module": self.module, "message": str(self)}


# lattice
class LatticeError(ToralError):
    module = "lattice_algebra"


class SingularMatrixError(LatticeError):
    pass


class InvalidActionError(LatticeError):
    pass


class UnsupportedDegreeError(LatticeError):
    pass


class OrbitSearchError(LatticeError):
    def __init__(self, message, pair=None, radius=None):
        super().__init__(message)
        self.pair = pair
        self.radius = radius


# catalog
class CatalogError(ToralError):
    module = "action_catalog"


class SingularCompanionError(CatalogError):
    pass


class InvalidParameterError(CatalogError):
    pass


class DegenerateExponentError(CatalogError):
    pass


# kernels
class KernelError(ToralError):
    module = "harmonic_kernels"


class UndefinedDefectError(KernelError):
    pass


class InvalidCoefficientsError(KernelError):
    pass


class KernelScaleLimitError(KernelError):
    pass


# spectral
class SpectralError(ToralError):
    module = "spectral_engine"


class GrowthEstimationError(SpectralError):
    pass


class ResolutionError(SpectralError):
    pass


# cumulants
class CumulantError(ToralError):
    module = "cumulant_lab"


class IncompleteTableError(CumulantError):
    pass


class CumulantScaleLimitError(CumulantError):
    pass


# simulate
class SimulationError(ToralError):
    module = "clt_simulator"


class ConfigurationError(SimulationError):
    pass
