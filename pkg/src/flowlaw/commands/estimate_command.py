"""
estimate: learn the feature model and the refined PL families from reference traffic
"""

import argparse
import logging
from typing import Dict

from ..core.detector import dense_windows, vanilla_family, window_measures
from ..core.errors import EmptyReference
from ..core.features import fit_feature_model
from ..core.pl_learning import estimate_periods, generate_candidates
from ..core.pl_refinement import RefinementResult, refine_family
from ..utils.config import RunConfig
from ..utils.file_io import FileIO
from .base_command import BaseCommand

logger = logging.getLogger(__name__)


def refinement_summary(result: RefinementResult, window_indices) -> Dict:
    """Report entry for one refined family"""
    problem, selection = result.problem, result.selection
    chosen = selection.indices
    return {
        'lambda': problem.lam,
        'M': problem.n_windows,
        'N': problem.n_pls,
        'chosen': chosen,
        'primary_cost': selection.primary_cost,
        'secondary_cost': selection.secondary_cost,
        'c_v': problem.c_v.tolist(),
        'selected_time_of_day': [None if p is None else p.time_of_day
                                 for p in result.family.provenance],
        'window_index': list(window_indices),
        'div_all_candidates': problem.d.min(axis=1).tolist(),
        'div_selected': problem.d[:, chosen].min(axis=1).tolist(),
    }


class EstimateCommand(BaseCommand):
    name = 'estimate'
    help = 'Fit the feature model and learn refined PL families from reference flows'

    def run(self, config: RunConfig, args: argparse.Namespace) -> int:
        self.require_paths(config, 'model', 'pl_family', 'report')
        flows = self.load_flows(config, args)
        model = fit_feature_model(flows, config.features.clusters, config.features.levels,
                                  seed=config.seed)
        alphabet = model.alphabet
        quantized = self.quantize(flows, model)
        horizon, windows = self.windows_for(flows, quantized, config)
        tested = dense_windows(windows, max(config.detection.min_flows_per_window, 1))
        if not tested:
            raise EmptyReference(f"No reference window holds {config.detection.min_flows_per_window} "
                                 f"or more flows")

        periods = estimate_periods(quantized, alphabet, config.histogram)
        candidates = dict(zip(('free', 'based'), generate_candidates(
            quantized, horizon, periods.features, alphabet.total,
            priors=config.priors, clock_start_s=config.horizon.clock_start_s)))

        lambdas = {'free': config.detection.lambda_free, 'based': config.detection.lambda_based}
        kinds = [k for k, on in (('free', config.detection.run_free),
                                 ('based', config.detection.run_based)) if on]
        refined = {}
        for kind in kinds:
            measures = window_measures(tested, alphabet.total, kind)
            refined[kind] = refine_family(measures, candidates[kind], lambdas[kind],
                                          config.refinement, config.divergence)

        vanilla = vanilla_family(quantized, alphabet.total)
        FileIO.write_json(config.paths.model, model.to_dict())
        FileIO.write_json(config.paths.pl_family, {
            'alphabet': {'sizes': list(alphabet.sizes), 'total': alphabet.total},
            'epsilon': config.divergence.epsilon,
            'families': {k: r.family.to_dict() for k, r in refined.items()},
            'vanilla': {f.kind: f.to_dict() for f in vanilla},
        })
        FileIO.write_json(config.paths.report, {
            'alphabet_size': alphabet.total,
            'horizon': list(horizon),
            'windows': {'total': len(windows), 'tested': len(tested),
                        'sparse': len(windows) - len(tested)},
            'periods': periods.to_dict(),
            'candidates': {k: len(c) for k, c in candidates.items()},
            'families': {k: refinement_summary(r, [w.index for w in tested])
                         for k, r in refined.items()},
        })

        print(f"Reference: {len(flows)} flows, {len(tested)} of {len(windows)} windows tested, "
              f"|Σ| = {alphabet.total}")
        for a, est in sorted(periods.features.items()):
            t_p = 'none' if est.t_p is None else f"{est.t_p / 3600:.2f} h"
            t_d = 'none' if est.t_d is None else f"{est.t_d / 3600:.2f} h"
            print(f"  feature {a}: t_d = {t_d}, t_p = {t_p}")
        for kind, r in refined.items():
            labels = ', '.join(p.time_of_day for p in r.family.provenance if p is not None)
            print(f"  {kind}: {len(r.family)} of {len(candidates[kind])} PLs selected "
                  f"at lambda = {lambdas[kind]:g} ({labels})")
        return 0
