"""
Run configuration for FlowLaw

A run is described by one JSON file. Dimensional values may be given as
pint quantity strings; missing sections take their defaults.
"""

import dataclasses
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from ..core.detector import DetectionConfig
from ..core.errors import ConfigError
from ..core.flow_model import WindowingConfig
from ..core.measures import DivergenceConfig
from ..core.pl_learning import HistogramConfig
from ..core.pl_refinement import RefinementParams
from ..core.traffic_gen import AnomalySpec, DiurnalProfile, NodeSpec, default_diurnal_profile
from .file_io import FileIO
from .units import to_magnitude

PATH_KEYS = ('flows', 'packets', 'ground_truth', 'model', 'pl_family', 'report',
             'timeline', 'metrics')
OUTPUT_KEYS = ('flows', 'ground_truth', 'model', 'pl_family', 'report', 'timeline', 'metrics')


@dataclass(frozen=True)
class Paths:
    flows: Optional[str] = 'flows.csv'
    packets: Optional[str] = None
    ground_truth: Optional[str] = 'ground_truth.json'
    model: Optional[str] = 'model.json'
    pl_family: Optional[str] = 'pl_family.json'
    report: Optional[str] = 'refinement_report.json'
    timeline: Optional[str] = 'timeline.csv'
    metrics: Optional[str] = 'metrics.json'

    def __post_init__(self):
        outputs = [getattr(self, k) for k in OUTPUT_KEYS if getattr(self, k)]
        if len(set(outputs)) != len(outputs):
            raise ConfigError(f"Output paths must be distinct, got {outputs}")


@dataclass(frozen=True)
class HorizonConfig:
    """Horizon start t0, optional length and the time of day at t0, in seconds"""

    start_s: float = 0.0
    length_s: Optional[float] = None
    clock_start_s: float = 61200.0

    def __post_init__(self):
        if self.length_s is not None and not self.length_s > 0:
            raise ConfigError(f"Horizon length must be positive, got {self.length_s}")

    def bounds(self, last_time: float) -> Tuple[float, float]:
        """(t0, t1); without a configured length the horizon ends just after last_time"""
        if self.length_s is not None:
            return self.start_s, self.start_s + self.length_s
        return self.start_s, last_time + 1e-6


@dataclass(frozen=True)
class FeatureConfig:
    clusters: int = 2
    levels: Tuple[int, int, int] = (2, 2, 8)

    def __post_init__(self):
        if self.clusters < 1 or len(self.levels) != 3 or any(n < 1 for n in self.levels):
            raise ConfigError(f"Need K >= 1 and three positive levels, got K={self.clusters}, "
                              f"levels={self.levels}")


@dataclass(frozen=True)
class GeneratorConfig:
    nodes: Tuple[NodeSpec, ...] = ()
    profile: DiurnalProfile = field(default_factory=default_diurnal_profile)
    anomalies: Tuple[AnomalySpec, ...] = ()


@dataclass(frozen=True)
class RunConfig:
    """Every parameter of a generate / estimate / detect / evaluate run"""

    seed: int = 0
    method: str = 'both'
    paths: Paths = field(default_factory=Paths)
    horizon: HorizonConfig = field(default_factory=HorizonConfig)
    windowing: WindowingConfig = field(default_factory=WindowingConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    divergence: DivergenceConfig = field(default_factory=DivergenceConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    refinement: RefinementParams = field(default_factory=RefinementParams)
    histogram: HistogramConfig = field(default_factory=HistogramConfig)
    priors: Tuple[Tuple[float, float], ...] = ()
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)

    def __post_init__(self):
        if self.method not in ('free', 'based', 'both'):
            raise ConfigError(f"method must be free, based or both, got {self.method!r}")

    def with_overrides(self, lambda_free: Optional[float] = None,
                       lambda_based: Optional[float] = None,
                       seed: Optional[int] = None,
                       method: Optional[str] = None) -> 'RunConfig':
        """Copy with command-line overrides applied"""
        detection = self.detection
        if lambda_free is not None:
            detection = dataclasses.replace(detection, lambda_free=lambda_free)
        if lambda_based is not None:
            detection = dataclasses.replace(detection, lambda_based=lambda_based)
        method = method or self.method
        detection = dataclasses.replace(detection, run_free=method in ('free', 'both'),
                                        run_based=method in ('based', 'both'))
        return dataclasses.replace(self, detection=detection, method=method,
                                   seed=self.seed if seed is None else seed)


def _section(data: Dict, name: str) -> Dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"Section {name!r} must be an object")
    return value


def _seconds(section: Dict, key: str, default: Any = None) -> Optional[float]:
    value = section.get(key, default)
    return None if value is None else to_magnitude(value, 'second')


def _build(cls, **kwargs):
    try:
        return cls(**{k: v for k, v in kwargs.items() if v is not None})
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Invalid {cls.__name__}: {e}") from e


def _generator(data: Dict) -> GeneratorConfig:
    defaults = _section(data, 'defaults')

    def node(entry) -> NodeSpec:
        merged = {**defaults, **({'ip': entry} if isinstance(entry, str) else entry)}
        return _build(
            NodeSpec, ip=merged.get('ip'),
            peak_rate_fps=(None if 'peak_rate' not in merged
                           else to_magnitude(merged['peak_rate'], '1 / second')),
            peak_mean_size_bytes=(None if 'peak_mean_size' not in merged
                                  else to_magnitude(merged['peak_mean_size'], 'byte')),
            size_variance=(None if 'size_variance' not in merged
                           else to_magnitude(merged['size_variance'], 'byte ** 2')),
            mean_duration_s=(None if 'mean_duration' not in merged
                             else to_magnitude(merged['mean_duration'], 'second')),
        )

    anomalies = tuple(
        _build(AnomalySpec, ip=a.get('ip'), start_s=_seconds(a, 'start'),
               duration_s=_seconds(a, 'duration'),
               mean_size_multiplier=a.get('mean_size_multiplier'), id=a.get('id', i))
        for i, a in enumerate(data.get('anomalies', []))
    )
    profile = data.get('profile', 'default')
    if profile == 'default':
        profile = default_diurnal_profile()
    elif profile == 'flat':
        profile = DiurnalProfile.flat()
    else:
        try:
            if isinstance(profile, dict) and 'plateaus' in profile:
                profile = DiurnalProfile.plateaus(
                    [(_seconds(p, 'start'), float(p['level'])) for p in profile['plateaus']],
                    ramp_s=to_magnitude(profile.get('ramp', 1.0), 'second'),
                )
            else:
                profile = DiurnalProfile.from_dict(profile)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid profile: {e}") from e
    return GeneratorConfig(nodes=tuple(node(n) for n in data.get('nodes', [])),
                           profile=profile, anomalies=anomalies)


def parse_config(data: Dict) -> RunConfig:
    """
    Build a RunConfig from a parsed JSON document

    Raises:
        ConfigError: On unknown units, wrong dimensions or invalid values
    """
    if not isinstance(data, dict):
        raise ConfigError("Configuration must be a JSON object")

    paths = _section(data, 'paths')
    unknown = set(paths) - set(PATH_KEYS)
    if unknown:
        raise ConfigError(f"Unknown path key(s): {sorted(unknown)}")

    horizon = _section(data, 'horizon')
    windowing = _section(data, 'windowing')
    features = _section(data, 'features')
    histogram = _section(data, 'histogram')
    detection = _section(data, 'detection')
    refinement = _section(data, 'refinement')
    divergence = _section(data, 'divergence')

    priors = []
    for p in data.get('priors', []):
        if not isinstance(p, dict) or 't_d' not in p or 't_p' not in p:
            raise ConfigError(f"Each prior needs t_d and t_p, got {p!r}")
        priors.append((to_magnitude(p['t_d'], 'second'), to_magnitude(p['t_p'], 'second')))

    levels = features.get('levels')
    return _build(
        RunConfig,
        seed=data.get('seed'),
        method=data.get('method'),
        paths=Paths(**{k: paths.get(k, getattr(Paths, k)) for k in PATH_KEYS}),
        horizon=_build(HorizonConfig, start_s=_seconds(horizon, 'start'),
                       length_s=_seconds(horizon, 'length'),
                       clock_start_s=_seconds(horizon, 'clock_start')),
        windowing=_build(WindowingConfig, window_size_s=_seconds(windowing, 'window_size'),
                         hop_s=_seconds(windowing, 'hop'),
                         flow_gap_s=_seconds(windowing, 'flow_gap')),
        features=_build(FeatureConfig, clusters=features.get('clusters'),
                        levels=None if levels is None else tuple(int(n) for n in levels)),
        divergence=_build(DivergenceConfig, epsilon=divergence.get('epsilon')),
        detection=_build(DetectionConfig, lambda_free=detection.get('lambda_free'),
                         lambda_based=detection.get('lambda_based'),
                         min_flows_per_window=detection.get('min_flows_per_window')),
        refinement=_build(RefinementParams, gamma_start=refinement.get('gamma_start'),
                          r=refinement.get('r'), gamma_th=refinement.get('gamma_th'),
                          gamma_secondary=refinement.get('gamma_secondary')),
        histogram=_build(HistogramConfig, bin_width_s=_seconds(histogram, 'bin_width'),
                         freq_threshold=histogram.get('freq_threshold'),
                         peak_min_prominence=histogram.get('peak_min_prominence')),
        priors=tuple(priors),
        generator=_generator(_section(data, 'generator')),
    )


def load_config(filename: Optional[str]) -> RunConfig:
    """Read and parse a configuration file; None gives the defaults"""
    if filename is None:
        return RunConfig()
    return parse_config(FileIO.read_json(filename))
