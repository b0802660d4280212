"""Master-equation model of intensity-noise heating of a trapped atom."""

from .model import (
    PRESETS,
    LevelDistribution,
    RateGenerator,
    TrapModel,
    build_cooling_generator,
    build_generator,
    build_heating_generator,
    combine_generators,
    initial_distribution,
    point_distribution,
)
from .integrate import (
    IntegrationError,
    IntegratorConfig,
    StationaryError,
    TimeGrid,
    evolve,
    evolve_times,
    moment_oracle,
    stationary_distribution,
)
from .observables import ObservableSeries, conditional_moments, reduce_series, survival

__version__ = "0.1.0"
