"""
Run configuration for the command line tools.

Every block has defaults, so an empty JSON object is a valid configuration.
Unknown keys are rejected.
"""
import os

from pathlib import Path
from typing import Optional
from typing import Union

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationError

from ipmhull import DATA_DIR
from ipmhull.core.errors import ConfigError
from ipmhull.core.states import ToleranceConfig
from ipmhull.hull.hullApprox import CloudConfig
from ipmhull.hull.separators import CONVEXITY_SAMPLES
from ipmhull.subsolution.timeSeries import HULL_DENSITY_BOUND

EXAMPLE_CONFIG = os.path.join(DATA_DIR, "exampleRun.json")


class SamplingConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 0
    count: int = Field(default=100, ge=0)
    """
    Wave cone samples emitted by wave-cone when no --count is given, and the
    number of lines checked by separate --verify
    """


class ConvexityConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    samples: int = Field(default=CONVEXITY_SAMPLES, ge=3)
    """ Equispaced t values on [-1, 1] per line checked by separate --verify """


class AuditConfig(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    rhoSup: float = Field(default=HULL_DENSITY_BOUND, gt=0.0, alias="rho_sup")
    """ Density bound used on the right hand side of the time bound """


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    tolerance: ToleranceConfig = ToleranceConfig()
    cloud: CloudConfig = CloudConfig()
    sampling: SamplingConfig = SamplingConfig()
    convexity: ConvexityConfig = ConvexityConfig()
    audit: AuditConfig = AuditConfig()

    def withOverrides(self,
                      eqTol: Optional[float] = None,
                      seed: Optional[int] = None) -> "RunConfig":
        """
        Apply the --tol and --seed command line overrides.
        """
        config = self
        try:
            if eqTol is not None:
                tolerance = ToleranceConfig(eqTol=eqTol,
                                            boundaryPolicy=config.tolerance.boundaryPolicy)
                config = config.model_copy(update={"tolerance": tolerance})
            if seed is not None:
                cloud = CloudConfig.model_validate({**config.cloud.model_dump(), "seed": seed})
                sampling = config.sampling.model_copy(update={"seed": seed})
                config = config.model_copy(update={"cloud": cloud, "sampling": sampling})
        except ValidationError as err:
            raise ConfigError(f"invalid override: {err}") from err
        return config


def loadRunConfig(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Load a run configuration, or the defaults when no path is given.
    """
    if path is None:
        return RunConfig()
    try:
        return RunConfig.model_validate_json(Path(path).read_text())
    except OSError as err:
        raise ConfigError(f"cannot read configuration {path}: {err}") from err
    except ValidationError as err:
        raise ConfigError(f"invalid configuration {path}: {err}") from err
