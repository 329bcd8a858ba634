"""
Flow feature extraction for FlowLaw: IP clustering, quantization and the symbol alphabet
"""

import ipaddress
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np
from sklearn.cluster import KMeans

from .errors import EmptyReference, SymbolOutOfAlphabet, TooFewPoints
from .flow_model import Flow

logger = logging.getLogger(__name__)

FEATURE_NAMES = ('cluster', 'distance', 'size', 'duration')


def ip_to_vector(ip: str) -> np.ndarray:
    """Embed a dotted-quad IPv4 address as a real 4-vector of octets"""
    return np.frombuffer(ipaddress.IPv4Address(ip).packed, dtype=np.uint8).astype(float)


@dataclass(frozen=True)
class IpClusterModel:
    """K-means model over user IPs in octet space"""

    k: int
    centers: Tuple[Tuple[float, float, float, float], ...]
    seed: int = 0

    def __post_init__(self):
        if self.k < 1 or len(self.centers) != self.k:
            raise ValueError(f"Cluster model needs k >= 1 centers, got k={self.k}, "
                             f"{len(self.centers)} centers")

    def assign(self, ips: Sequence[str]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Assign IPs to their nearest cluster center

        Args:
            ips: Dotted-quad addresses

        Returns:
            Tuple of (cluster labels, Euclidean distance to the assigned center)
        """
        unique = sorted(set(ips))
        if not unique:
            return np.zeros(0, dtype=np.int64), np.zeros(0)
        points = np.vstack([ip_to_vector(ip) for ip in unique])
        centers = np.asarray(self.centers, dtype=float)
        dist = np.linalg.norm(points[:, None, :] - centers[None, :, :], axis=2)
        labels = np.argmin(dist, axis=1)
        lookup = {ip: (int(labels[i]), float(dist[i, labels[i]])) for i, ip in enumerate(unique)}
        pairs = [lookup[ip] for ip in ips]
        return (np.array([p[0] for p in pairs], dtype=np.int64),
                np.array([p[1] for p in pairs], dtype=float))

    def to_dict(self) -> Dict:
        return {'k': self.k, 'centers': [list(c) for c in self.centers], 'seed': self.seed}

    @classmethod
    def from_dict(cls, data: Dict) -> 'IpClusterModel':
        return cls(k=int(data['k']),
                   centers=tuple(tuple(float(v) for v in c) for c in data['centers']),
                   seed=int(data.get('seed', 0)))


def fit_ip_clusters(ips: Iterable[str], k: int, seed: int = 0,
                    restarts: int = 10) -> IpClusterModel:
    """
    Cluster user IPs with Lloyd's k-means on octet vectors

    Each restart takes as initial centers the first k points after a seeded
    shuffle of the sorted IP set; the restart with the lowest inertia wins
    (the earliest on ties), so a fixed seed reproduces the model exactly.

    Args:
        ips: User IP addresses (duplicates ignored)
        k: Number of clusters K
        seed: Shuffle seed
        restarts: Number of shuffled initializations

    Returns:
        The fitted cluster model

    Raises:
        TooFewPoints: If there are fewer distinct IPs than clusters
    """
    unique = sorted(set(ips), key=lambda ip: int(ipaddress.IPv4Address(ip)))
    if k < 1:
        raise ValueError(f"Number of clusters must be positive, got {k}")
    if len(unique) < k:
        raise TooFewPoints(f"{len(unique)} distinct IP(s) cannot form {k} clusters")

    points = np.vstack([ip_to_vector(ip) for ip in unique])
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(restarts, 1)):
        init = points[rng.permutation(len(points))[:k]]
        km = KMeans(n_clusters=k, init=init, n_init=1, max_iter=100,
                    tol=0.0, algorithm='lloyd', random_state=seed)
        km.fit(points)
        if best is None or km.inertia_ < best.inertia_:
            best = km
    logger.debug("k-means converged after %d iteration(s), inertia %.4g",
                 best.n_iter_, best.inertia_)
    return IpClusterModel(k=k, centers=tuple(tuple(float(v) for v in c)
                                             for c in best.cluster_centers_),
                          seed=seed)


@dataclass(frozen=True)
class FeatureBins:
    """Uniform bins for one continuous feature, learned from reference data"""

    levels: int
    lo: float
    hi: float

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError(f"Quantization levels must be >= 1, got {self.levels}")

    def quantize(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.hi <= self.lo:
            return np.zeros(values.shape, dtype=np.int64)
        idx = np.floor((values - self.lo) / (self.hi - self.lo) * self.levels)
        # Out-of-range values clamp to the nearest bin
        return np.clip(idx, 0, self.levels - 1).astype(np.int64)

    def to_dict(self) -> Dict:
        return {'levels': self.levels, 'lo': self.lo, 'hi': self.hi}

    @classmethod
    def from_dict(cls, data: Dict) -> 'FeatureBins':
        return cls(levels=int(data['levels']), lo=float(data['lo']), hi=float(data['hi']))


@dataclass(frozen=True)
class Quantizer:
    """Per-feature bins for distance-to-center, flow size and flow duration"""

    distance: FeatureBins
    size: FeatureBins
    duration: FeatureBins

    @property
    def levels(self) -> Tuple[int, int, int]:
        return (self.distance.levels, self.size.levels, self.duration.levels)

    def to_dict(self) -> Dict:
        return {'distance': self.distance.to_dict(), 'size': self.size.to_dict(),
                'duration': self.duration.to_dict()}

    @classmethod
    def from_dict(cls, data: Dict) -> 'Quantizer':
        return cls(distance=FeatureBins.from_dict(data['distance']),
                   size=FeatureBins.from_dict(data['size']),
                   duration=FeatureBins.from_dict(data['duration']))


@dataclass(frozen=True)
class SymbolAlphabet:
    """The product alphabet Σ = clusters × distance × size × duration levels"""

    sizes: Tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.sizes) != 4 or any(s < 1 for s in self.sizes):
            raise ValueError(f"Alphabet needs four positive sizes, got {self.sizes}")

    @property
    def total(self) -> int:
        return int(np.prod(self.sizes))

    def encode(self, cluster, distance, size, duration) -> np.ndarray:
        """Mixed-radix encoding of the four feature levels"""
        k, l_da, l_b, l_dt = self.sizes
        cluster, distance, size, duration = (np.asarray(v, dtype=np.int64)
                                             for v in (cluster, distance, size, duration))
        return ((cluster * l_da + distance) * l_b + size) * l_dt + duration

    def decode(self, symbols) -> np.ndarray:
        """
        Decode symbols back to their feature levels

        Returns:
            Array of shape (4, n): cluster, distance, size and duration levels
        """
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.size and (symbols.min() < 0 or symbols.max() >= self.total):
            raise SymbolOutOfAlphabet(f"Symbols must lie in [0, {self.total})")
        _, l_da, l_b, l_dt = self.sizes
        duration = symbols % l_dt
        rest = symbols // l_dt
        size = rest % l_b
        rest = rest // l_b
        distance = rest % l_da
        cluster = rest // l_da
        return np.vstack([cluster, distance, size, duration])


@dataclass(frozen=True)
class QuantizedFlow:
    """A flow reduced to its symbol in Σ and its transmission time"""

    symbol: int
    start_time: float


def fit_quantizer(flows: Sequence[Flow], model: IpClusterModel,
                  levels: Tuple[int, int, int]) -> Quantizer:
    """
    Learn uniform quantization bins from reference flows

    Args:
        flows: Reference flows
        model: Fitted IP cluster model
        levels: Levels for (distance, size, duration)

    Returns:
        The fitted quantizer

    Raises:
        EmptyReference: If flows is empty
    """
    if not flows:
        raise EmptyReference("Cannot fit quantizer bins on an empty reference")
    _, distances = model.assign([f.user_ip for f in flows])
    sizes = np.array([f.size_bytes for f in flows], dtype=float)
    durations = np.array([f.duration_s for f in flows], dtype=float)

    bins = [FeatureBins(levels=int(n), lo=float(v.min()), hi=float(v.max()))
            for n, v in zip(levels, (distances, sizes, durations))]
    for name, b in zip(FEATURE_NAMES[1:], bins):
        if b.hi <= b.lo:
            logger.warning("Reference %s range is degenerate (%g); every flow maps to level 0",
                           name, b.lo)
    return Quantizer(*bins)


@dataclass(frozen=True)
class FeatureModel:
    """Everything detection needs to turn flows into symbols"""

    clusters: IpClusterModel
    quantizer: Quantizer

    @property
    def alphabet(self) -> SymbolAlphabet:
        return SymbolAlphabet((self.clusters.k,) + self.quantizer.levels)

    def to_dict(self) -> Dict:
        return {'clusters': self.clusters.to_dict(), 'quantizer': self.quantizer.to_dict(),
                'alphabet': {'sizes': list(self.alphabet.sizes), 'total': self.alphabet.total},
                'seed': self.clusters.seed}

    @classmethod
    def from_dict(cls, data: Dict) -> 'FeatureModel':
        return cls(clusters=IpClusterModel.from_dict(data['clusters']),
                   quantizer=Quantizer.from_dict(data['quantizer']))


def fit_feature_model(flows: Sequence[Flow], k: int, levels: Tuple[int, int, int],
                      seed: int = 0) -> FeatureModel:
    """Fit IP clusters and quantizer bins on reference flows"""
    if not flows:
        raise EmptyReference("Reference traffic contains no flows")
    clusters = fit_ip_clusters({f.user_ip for f in flows}, k, seed)
    return FeatureModel(clusters=clusters, quantizer=fit_quantizer(flows, clusters, levels))


def quantize_flows(flows: Sequence[Flow], model: IpClusterModel,
                   quantizer: Quantizer) -> List[QuantizedFlow]:
    """
    Map flows to their mixed-radix symbols (k(x), q(d_a), q(b), q(d_t))

    Args:
        flows: Flows to quantize
        model: Fitted IP cluster model
        quantizer: Fitted quantizer

    Returns:
        Quantized flows in input order, start times preserved
    """
    if not flows:
        return []
    alphabet = SymbolAlphabet((model.k,) + quantizer.levels)
    labels, distances = model.assign([f.user_ip for f in flows])
    symbols = alphabet.encode(
        labels,
        quantizer.distance.quantize(distances),
        quantizer.size.quantize([f.size_bytes for f in flows]),
        quantizer.duration.quantize([f.duration_s for f in flows]),
    )
    return [QuantizedFlow(symbol=int(s), start_time=float(f.start_time))
            for s, f in zip(symbols, flows)]


def symbols_of(seq: Sequence[QuantizedFlow]) -> np.ndarray:
    """Symbol indices of a quantized flow sequence as an int array"""
    return np.fromiter((g.symbol for g in seq), dtype=np.int64, count=len(seq))
