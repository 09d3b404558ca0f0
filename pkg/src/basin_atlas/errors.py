"""Exception hierarchy shared by every stage of the pipeline."""


class BasinAtlasError(Exception):
    """Base class for all errors raised by basin_atlas."""


class InvalidStateError(BasinAtlasError, ValueError):
    pass


class InvalidParamsError(BasinAtlasError, ValueError):
    pass


class IntegrationError(BasinAtlasError):
    """Trajectory integration failed (blow-up, step underflow, step budget)."""


class EquilibriumError(BasinAtlasError):
    pass


class NotEquilibriumError(EquilibriumError):
    pass


class NonHyperbolicError(EquilibriumError):
    pass


class SamplingError(BasinAtlasError):
    pass


class BisectionError(SamplingError):
    pass


class EmptyCloudError(SamplingError):
    pass


class KernelError(BasinAtlasError, ValueError):
    pass


class DuplicateNodeError(KernelError):
    pass


class BasisError(BasinAtlasError):
    pass


class CoverageError(BasinAtlasError):
    pass


class NormalEstimationError(BasinAtlasError):
    pass


class AugmentationError(BasinAtlasError):
    pass


class MeshingError(BasinAtlasError):
    pass


class ConfigError(BasinAtlasError):
    pass


class DependencyError(BasinAtlasError):
    """A pipeline stage was run before the stage producing its inputs."""
