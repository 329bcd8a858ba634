"""
PL refinement for FlowLaw

Selects a small, regular sub-family of candidate PLs covering every reference
window. Window i is covered by PL j when D_ij <= λ; the selection minimizes
1'x + γ·c_v'x subject to A·x >= 1.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .errors import ConfigError, Infeasible, TooLarge
from .measures import DivergenceConfig, based_divergence_matrix, free_divergence_matrix
from .pl_learning import PLFamily

logger = logging.getLogger(__name__)

MAX_EXACT_PLS = 20
_CHUNK_BITS = 16
_TIE_TOL = 1e-12


def family_divergence_matrix(windows: Sequence, family: PLFamily,
                             cfg: DivergenceConfig = DivergenceConfig()) -> np.ndarray:
    """
    Divergence of every window measure against every PL of a family

    Args:
        windows: Window measures of the family's kind
        family: PL family; its kind picks d_free or d_based
        cfg: Divergence floor

    Returns:
        M×N matrix D with D[i, j] the divergence of window i from PL j
    """
    if family.kind == 'free':
        return free_divergence_matrix(windows, family.pls, cfg)
    return based_divergence_matrix(windows, family.pls, cfg)


def coefficient_of_variation(coverage_column) -> float:
    """
    Regularity of the windows one PL covers

    Gaps between consecutive covered window indices; std (ddof=1) over mean.
    Fewer than two gaps give 0.
    """
    covered = np.flatnonzero(np.asarray(coverage_column, dtype=bool))
    gaps = np.diff(covered)
    if gaps.size < 2:
        return 0.0
    return float(np.std(gaps, ddof=1) / np.mean(gaps))


@dataclass(frozen=True, eq=False)
class CoverageProblem:
    """Coverage matrix A (M windows × N PLs), PL weights c_v, λ and the divergences D"""

    a: np.ndarray
    c_v: np.ndarray
    lam: float
    d: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=bool)
        if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
            raise ValueError(f"Coverage matrix must be M×N with M, N >= 1, got shape {a.shape}")
        c_v = np.asarray(self.c_v, dtype=float)
        if c_v.shape != (a.shape[1],) or np.any(c_v < 0):
            raise ValueError("c_v must be a non-negative vector with one entry per PL")
        object.__setattr__(self, 'a', a)
        object.__setattr__(self, 'c_v', c_v)

    @property
    def n_windows(self) -> int:
        return int(self.a.shape[0])

    @property
    def n_pls(self) -> int:
        return int(self.a.shape[1])

    def uncoverable(self) -> List[int]:
        return np.flatnonzero(~self.a.any(axis=1)).tolist()

    @classmethod
    def from_matrix(cls, a, c_v=None, lam: float = 1.0) -> 'CoverageProblem':
        """Problem from a bare 0-1 matrix; c_v defaults to the columns' own regularity"""
        a = np.asarray(a, dtype=bool)
        if c_v is None:
            c_v = [coefficient_of_variation(a[:, j]) for j in range(a.shape[1])]
        return cls(a=a, c_v=np.asarray(c_v, dtype=float), lam=lam)


@dataclass(frozen=True)
class RefinementParams:
    """γ sweep settings: γ runs from gamma_start down by factor r while γ >= gamma_th"""

    gamma_start: float = 1.0
    r: float = 0.5
    gamma_th: float = 0.01
    gamma_secondary: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.r < 1:
            raise ConfigError(f"Discount ratio r must lie in (0, 1), got {self.r}")
        if not 0 < self.gamma_th <= self.gamma_start:
            raise ConfigError(f"Need 0 < gamma_th <= gamma_start, got {self.gamma_th}, "
                              f"{self.gamma_start}")
        if self.gamma_secondary is None:
            object.__setattr__(self, 'gamma_secondary', self.gamma_th)

    def gammas(self) -> List[float]:
        """The swept γ values; γ_th closes the sweep when the ratio steps over it"""
        out = []
        gamma = self.gamma_start
        while gamma >= self.gamma_th:
            out.append(gamma)
            gamma *= self.r
        if out[-1] != self.gamma_th:
            out.append(self.gamma_th)
        return out


@dataclass(frozen=True, eq=False)
class Selection:
    """Chosen PLs x with primary cost 1'x and secondary cost c_v'x"""

    chosen: np.ndarray
    primary_cost: int
    secondary_cost: float

    @property
    def indices(self) -> List[int]:
        return np.flatnonzero(self.chosen).tolist()

    def cost(self, gamma: float) -> float:
        return self.primary_cost + gamma * self.secondary_cost


def _selection(problem: CoverageProblem, chosen: np.ndarray) -> Selection:
    chosen = np.asarray(chosen, dtype=bool)
    missed = np.flatnonzero(~problem.a[:, chosen].any(axis=1))
    if missed.size:
        raise Infeasible(missed.tolist(), hint="selection does not cover every window")
    return Selection(chosen=chosen, primary_cost=int(chosen.sum()),
                     secondary_cost=float(problem.c_v[chosen].sum()))


def _require_feasible(problem: CoverageProblem):
    missing = problem.uncoverable()
    if missing:
        raise Infeasible(missing)


def greedy_set_cover(problem: CoverageProblem, gamma: float) -> Selection:
    """
    Greedy weighted set cover

    Repeatedly adds the PL maximizing (newly covered windows) / (1 + γ·c_v),
    lowest index first on ties, until every window is covered.

    Raises:
        Infeasible: If some window is covered by no PL
    """
    _require_feasible(problem)
    a = problem.a
    weight = 1.0 + gamma * problem.c_v
    uncovered = np.ones(problem.n_windows, dtype=bool)
    chosen = np.zeros(problem.n_pls, dtype=bool)
    while uncovered.any():
        gain = a[uncovered].sum(axis=0).astype(float)
        score = np.where((gain > 0) & ~chosen, gain / weight, -np.inf)
        j = int(np.argmax(score))
        chosen[j] = True
        uncovered &= ~a[:, j]
    return _selection(problem, chosen)


def exact_set_cover(problem: CoverageProblem, gamma: float) -> Selection:
    """
    Exhaustive minimum of 1'x + γ·c_v'x over all 2^N subsets

    Ties go to the lexicographically smallest x (x[0] most significant).

    Raises:
        TooLarge: If N exceeds MAX_EXACT_PLS
        Infeasible: If some window is covered by no PL
    """
    n = problem.n_pls
    if n > MAX_EXACT_PLS:
        raise TooLarge(f"Exhaustive search over {n} PLs exceeds the limit of {MAX_EXACT_PLS}")
    _require_feasible(problem)

    # Bit n-1-j of a mask is x[j], so ascending masks are ascending lexicographic x
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    row_masks = (problem.a.astype(np.int64) << shifts).sum(axis=1)

    best_cost, best_mask = np.inf, -1
    total = 1 << n
    chunk = 1 << min(n, _CHUNK_BITS)
    for lo in range(0, total, chunk):
        masks = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        feasible = np.all((masks[:, None] & row_masks[None, :]) != 0, axis=1)
        if not feasible.any():
            continue
        bits = ((masks[:, None] >> shifts[None, :]) & 1).astype(float)
        cost = bits.sum(axis=1) + gamma * (bits @ problem.c_v)
        cost[~feasible] = np.inf
        chunk_best = cost.min()
        if chunk_best < best_cost - _TIE_TOL:
            best_cost = chunk_best
            best_mask = int(masks[np.flatnonzero(cost <= chunk_best + _TIE_TOL)[0]])

    chosen = ((best_mask >> shifts) & 1).astype(bool)
    return _selection(problem, chosen)


def heuristic_refine(problem: CoverageProblem,
                     params: RefinementParams = RefinementParams()) -> Selection:
    """
    Sweep γ and keep the greedy cover with the lowest 1'x + γ_2·c_v'x

    γ_2 is params.gamma_secondary (γ_th unless set). The first cover found
    wins ties.

    Raises:
        Infeasible: If some window is covered by no PL
    """
    best, best_cost = None, np.inf
    for gamma in params.gammas():
        sel = greedy_set_cover(problem, gamma)
        cost = sel.cost(params.gamma_secondary)
        logger.debug("gamma=%g: %d PL(s), cost %.6g", gamma, sel.primary_cost, cost)
        if cost < best_cost:
            best, best_cost = sel, cost
    return _selection(problem, best.chosen)


def build_coverage(windows: Sequence, family: PLFamily, lam: float,
                   cfg: DivergenceConfig = DivergenceConfig()) -> CoverageProblem:
    """
    Coverage problem of reference windows against a candidate family

    Args:
        windows: Window measures of the family's kind
        family: Candidate PLs
        lam: Threshold λ; PL j covers window i when D_ij <= λ
        cfg: Divergence floor

    Returns:
        The problem, with D kept for diagnostics
    """
    if not lam > 0:
        raise ConfigError(f"lambda must be positive, got {lam}")
    if not windows:
        raise ValueError("Coverage needs at least one window")
    d = family_divergence_matrix(windows, family, cfg)
    a = d <= lam
    c_v = np.array([coefficient_of_variation(a[:, j]) for j in range(a.shape[1])])
    return CoverageProblem(a=a, c_v=c_v, lam=lam, d=d)


@dataclass(frozen=True, eq=False)
class RefinementResult:
    """Refined family together with the problem and selection behind it"""

    family: PLFamily
    problem: CoverageProblem
    selection: Selection


def refine_family(windows: Sequence, family: PLFamily, lam: float,
                  params: RefinementParams = RefinementParams(),
                  cfg: DivergenceConfig = DivergenceConfig()) -> RefinementResult:
    """Build the coverage problem, run the γ sweep and cut the family down to the selection"""
    problem = build_coverage(windows, family, lam, cfg)
    uncovered = problem.uncoverable()
    if uncovered:
        raise Infeasible(uncovered)
    selection = heuristic_refine(problem, params)
    logger.info("Refined %s family: %d of %d PL(s) selected at lambda=%g (c_v sum %.4g)",
                family.kind, selection.primary_cost, problem.n_pls, lam,
                selection.secondary_cost)
    return RefinementResult(family=family.subset(selection.indices, problem.c_v),
                            problem=problem, selection=selection)
