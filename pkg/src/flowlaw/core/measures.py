"""
Empirical measures and floored divergences for FlowLaw

A model-free measure is the symbol frequency vector of a sequence; a
model-based measure is the frequency matrix of consecutive symbol pairs.
Probability laws (PLs) and window measures share these two shapes.
"""

from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

from .errors import AlphabetMismatch, ConfigError, SymbolOutOfAlphabet
from .features import QuantizedFlow, symbols_of


@dataclass(frozen=True, eq=False)
class ModelFreeMeasure:
    """Probability vector over Σ and the number of flows behind it"""

    probs: np.ndarray
    support_count: int

    @property
    def alphabet_size(self) -> int:
        return int(self.probs.shape[0])

    @property
    def insufficient(self) -> bool:
        return self.support_count == 0

    def to_dict(self) -> Dict:
        return {'probs': self.probs.tolist(), 'support_count': self.support_count}

    @classmethod
    def from_dict(cls, data: Dict) -> 'ModelFreeMeasure':
        return cls(probs=np.asarray(data['probs'], dtype=float),
                   support_count=int(data['support_count']))


@dataclass(frozen=True, eq=False)
class ModelBasedMeasure:
    """Frequency matrix of consecutive symbol pairs over Σ×Σ"""

    pair_probs: np.ndarray
    support_count: int

    @property
    def alphabet_size(self) -> int:
        return int(self.pair_probs.shape[0])

    @property
    def insufficient(self) -> bool:
        return self.support_count == 0

    @property
    def empty_rows(self) -> np.ndarray:
        """Boolean mask of symbols never seen as the first element of a pair"""
        return self.pair_probs.sum(axis=1) == 0

    def to_dict(self) -> Dict:
        return {'pair_probs': self.pair_probs.tolist(), 'support_count': self.support_count}

    @classmethod
    def from_dict(cls, data: Dict) -> 'ModelBasedMeasure':
        return cls(pair_probs=np.asarray(data['pair_probs'], dtype=float),
                   support_count=int(data['support_count']))


@dataclass(frozen=True)
class DivergenceConfig:
    """Floor ε applied before taking logarithms (natural log throughout)"""

    epsilon: float = 1e-20

    def __post_init__(self):
        if not 0 < self.epsilon <= 1e-6:
            raise ConfigError(f"epsilon must lie in (0, 1e-6], got {self.epsilon}")


def _checked_symbols(seq: Sequence[QuantizedFlow], alphabet_size: int) -> np.ndarray:
    if alphabet_size < 1:
        raise ValueError(f"Alphabet size must be >= 1, got {alphabet_size}")
    symbols = symbols_of(seq)
    if symbols.size and (symbols.min() < 0 or symbols.max() >= alphabet_size):
        bad = symbols[(symbols < 0) | (symbols >= alphabet_size)][0]
        raise SymbolOutOfAlphabet(f"Symbol {bad} outside alphabet of size {alphabet_size}")
    return symbols


def free_measure_from_symbols(symbols: np.ndarray, alphabet_size: int) -> ModelFreeMeasure:
    n = int(symbols.size)
    counts = np.bincount(symbols, minlength=alphabet_size).astype(float)
    probs = counts / n if n else counts
    return ModelFreeMeasure(probs=probs, support_count=n)


def based_measure_from_symbols(symbols: np.ndarray, alphabet_size: int) -> ModelBasedMeasure:
    n_pairs = max(int(symbols.size) - 1, 0)
    if n_pairs == 0:
        return ModelBasedMeasure(pair_probs=np.zeros((alphabet_size, alphabet_size)),
                                 support_count=0)
    pairs = symbols[:-1] * alphabet_size + symbols[1:]
    counts = np.bincount(pairs, minlength=alphabet_size * alphabet_size).astype(float)
    # Normalized by n-1 pairs so the matrix is a distribution
    return ModelBasedMeasure(pair_probs=(counts / n_pairs).reshape(alphabet_size, alphabet_size),
                             support_count=n_pairs)


def model_free_measure(seq: Sequence[QuantizedFlow], alphabet_size: int) -> ModelFreeMeasure:
    """
    Model-free empirical measure: relative frequency of each symbol

    Args:
        seq: Quantized flows
        alphabet_size: |Σ|

    Returns:
        The measure; an empty sequence gives all zeros with support_count 0

    Raises:
        SymbolOutOfAlphabet: If a symbol lies outside [0, |Σ|)
    """
    return free_measure_from_symbols(_checked_symbols(seq, alphabet_size), alphabet_size)


def model_based_measure(seq: Sequence[QuantizedFlow], alphabet_size: int) -> ModelBasedMeasure:
    """
    Model-based empirical measure: frequency of consecutive symbol pairs

    Args:
        seq: Quantized flows in time order
        alphabet_size: |Σ|

    Returns:
        The measure; fewer than two flows give all zeros with support_count 0
    """
    return based_measure_from_symbols(_checked_symbols(seq, alphabet_size), alphabet_size)


def conditional_probs(m: ModelBasedMeasure) -> np.ndarray:
    """
    Transition probabilities: each row of the pair matrix divided by its sum

    Rows with zero sum stay all zeros (see ModelBasedMeasure.empty_rows).
    """
    rows = m.pair_probs.sum(axis=1, keepdims=True)
    out = np.zeros_like(m.pair_probs)
    np.divide(m.pair_probs, rows, out=out, where=rows > 0)
    return out


def _floored_log_conditionals(pair_probs: np.ndarray, eps: float):
    floored = np.maximum(pair_probs, eps)
    log_cond = np.log(floored) - np.log(floored.sum(axis=-1, keepdims=True))
    return floored, log_cond


def d_free(nu: ModelFreeMeasure, mu: ModelFreeMeasure,
           cfg: DivergenceConfig = DivergenceConfig()) -> float:
    """
    Model-free divergence D(ν‖μ) = Σ ν̂ ln(ν̂/μ̂) with both sides floored at ε

    Raises:
        AlphabetMismatch: If the measures have different alphabet sizes
    """
    if nu.probs.shape != mu.probs.shape:
        raise AlphabetMismatch(f"Alphabet sizes differ: {nu.alphabet_size} vs {mu.alphabet_size}")
    nu_hat = np.maximum(nu.probs, cfg.epsilon)
    mu_hat = np.maximum(mu.probs, cfg.epsilon)
    return float(np.sum(nu_hat * (np.log(nu_hat) - np.log(mu_hat))))


def d_based(q: ModelBasedMeasure, pi: ModelBasedMeasure,
            cfg: DivergenceConfig = DivergenceConfig()) -> float:
    """
    Model-based divergence Σ q̂(i,j) ln(q̂(j|i)/π̂(j|i))

    Joint entries are floored at ε first; conditionals are formed from the
    floored values.

    Raises:
        AlphabetMismatch: If the measures have different alphabet sizes
    """
    if q.pair_probs.shape != pi.pair_probs.shape:
        raise AlphabetMismatch(f"Alphabet sizes differ: {q.alphabet_size} vs {pi.alphabet_size}")
    q_hat, log_q = _floored_log_conditionals(q.pair_probs, cfg.epsilon)
    _, log_pi = _floored_log_conditionals(pi.pair_probs, cfg.epsilon)
    return float(np.sum(q_hat * (log_q - log_pi)))


def free_divergence_matrix(windows: Sequence[ModelFreeMeasure], pls: Sequence[ModelFreeMeasure],
                           cfg: DivergenceConfig = DivergenceConfig()) -> np.ndarray:
    """
    d_free for every (window, PL) pair

    Returns:
        M×N matrix; entry (i, j) equals d_free(windows[i], pls[j], cfg)
    """
    nu = np.vstack([w.probs for w in windows]) if windows else np.zeros((0, 0))
    mu = np.vstack([p.probs for p in pls]) if pls else np.zeros((0, 0))
    if windows and pls and nu.shape[1] != mu.shape[1]:
        raise AlphabetMismatch(f"Alphabet sizes differ: {nu.shape[1]} vs {mu.shape[1]}")
    nu_hat = np.maximum(nu, cfg.epsilon)
    log_nu = np.log(nu_hat)
    log_mu = np.log(np.maximum(mu, cfg.epsilon))
    out = np.empty((len(windows), len(pls)))
    for j in range(len(pls)):
        out[:, j] = np.sum(nu_hat * (log_nu - log_mu[j]), axis=1)
    return out


def based_divergence_matrix(windows: Sequence[ModelBasedMeasure], pls: Sequence[ModelBasedMeasure],
                            cfg: DivergenceConfig = DivergenceConfig()) -> np.ndarray:
    """
    d_based for every (window, PL) pair

    Returns:
        M×N matrix; entry (i, j) equals d_based(windows[i], pls[j], cfg)
    """
    if not windows or not pls:
        return np.empty((len(windows), len(pls)))
    q = np.stack([w.pair_probs for w in windows])
    pi = np.stack([p.pair_probs for p in pls])
    if q.shape[1:] != pi.shape[1:]:
        raise AlphabetMismatch(f"Alphabet sizes differ: {q.shape[1]} vs {pi.shape[1]}")
    q_hat, log_q = _floored_log_conditionals(q, cfg.epsilon)
    _, log_pi = _floored_log_conditionals(pi, cfg.epsilon)
    out = np.empty((len(windows), len(pls)))
    for j in range(len(pls)):
        out[:, j] = np.sum(q_hat * (log_q - log_pi[j]), axis=(1, 2))
    return out
