#!/usr/bin/env python3
# depth_ruin/scripts/run_acceptance.py
"""
Desk-scale acceptance run

Checks the scale functions, the Gerber-Shiu formulas and the simulators
against each other and prints one summary line per check. Path counts
default to desk scale; pass --paths 1000000 for the full-size run.
"""

import argparse
import logging
import math
import sys
import tempfile
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np

sys.path.append(str(Path(__file__).parent.parent))

from data.exceptions import DepthRuinError  # noqa: E402
from data.models import CreepClock, PenaltySpec, SeverityDistribution, SimConfig  # noqa: E402
from numerics.inversion import invert_laplace  # noqa: E402
from penalty import gerber_shiu  # noqa: E402
from processes import levy_model, scale_engine  # noqa: E402
from scoring.agreement_scorer import AgreementScorer  # noqa: E402
from simulation import simulator  # noqa: E402
from testing.brute_force import RiemannOracle  # noqa: E402

CONFIG_DIR = Path(__file__).parent.parent / 'config'

Z_MAX = 3.0
LAPLACE_TOL = 1e-8
INVERSION_RTOL = 1e-7
REDUCTION_RTOL = 1e-8
DOMINANCE_MARGIN = 1e-8
SWEEP_SIZE = 100

logger = logging.getLogger('acceptance')


def model_families():
    return {
        'cramer_lundberg': levy_model.cramer_lundberg(1.5, 1.0, [(1.0, 1.0)]),
        'brownian_drift': levy_model.brownian_drift(1.0, 1.0),
        'jump_diffusion': levy_model.jump_diffusion(1.0, 1.0, 0.5, [(1.0, 1.0)]),
    }


def check_laplace_identity(args) -> Dict[str, Any]:
    """(psi(lam) - q) times the analytic transform of W is 1"""
    worst = 0.0
    for model in model_families().values():
        for q in (0.0, 0.05, 1.0):
            scale = scale_engine.build_scale(model, q)
            for lam in scale_engine.phi(scale) + np.logspace(-1, 1.3, 20):
                lam = float(lam)
                product = (levy_model.laplace_exponent(model, lam) - q) * scale_engine.laplace_transform(scale, lam)
                worst = max(worst, abs(product - 1.0))
    return {'passed': worst <= LAPLACE_TOL, 'detail': f"max |(psi-q)LW - 1| = {worst:.2e}"}


def check_inversion(args) -> Dict[str, Any]:
    """Closed-form W against Talbot inversion of 1/(psi - q)"""
    worst = 0.0
    for model in model_families().values():
        for q in (0.0, 0.05):
            scale = scale_engine.build_scale(model, q)
            abscissa = scale_engine.phi(scale) + 1.0
            for x in (0.5, 1.0, 2.0):
                inverted = invert_laplace(lambda s: 1 / (levy_model.laplace_exponent(model, s) - q), x,
                                          abscissa=abscissa)
                worst = max(worst, abs(scale_engine.W(scale, x) - inverted) / abs(inverted))
    return {'passed': worst <= INVERSION_RTOL, 'detail': f"max rel error {worst:.2e}"}


def check_two_sided_exit(args) -> Dict[str, Any]:
    """Monte Carlo exit above a=2 from x=1 against W(x)/W(a)"""
    model = model_families()['cramer_lundberg']
    cfg = SimConfig(n_paths=args.paths, seed=args.seed, workers=args.workers)
    scorer = AgreementScorer(Z_MAX)
    agreements = []
    for q in (0.0, 0.05):
        exact = scale_engine.two_sided_exit(scale_engine.build_scale(model, q), 1.0, 2.0)
        estimate = simulator.estimate_two_sided_exit(model, 1.0, 2.0, q, cfg)
        agreements.append(scorer.score(exact, estimate.mean, estimate.std_error))
    summary = scorer.summarize(agreements)
    return {'passed': summary['n_failed'] == 0, 'detail': f"max |z| = {summary['max_abs_z']:.2f}"}


def check_zero_mark_reduction(args) -> Dict[str, Any]:
    """Y = 0 reproduces the classical two-sided Gerber-Shiu function"""
    model = model_families()['cramer_lundberg']
    f = PenaltySpec.exp_deficit(0.5)
    worst = 0.0
    for q in (0.0, 0.05, 0.5):
        for b in (2.0, 3.0, 5.0):
            value = gerber_shiu.phi0_bounded_variation(model, q, b, f, SeverityDistribution.point_mass(0.0)).value
            classical = gerber_shiu.classical_gs(model, 0.0, q, b, f)
            worst = max(worst, abs(value - classical) / abs(classical))
    return {'passed': worst <= REDUCTION_RTOL, 'detail': f"max rel error {worst:.2e}"}


def check_bounded_variation_grid(args) -> Dict[str, Any]:
    """Formula against exact simulation on the 16-cell Cramér-Lundberg grid"""
    model = model_families()['cramer_lundberg']
    cfg = SimConfig(n_paths=args.paths, seed=args.seed, workers=args.workers)
    scorer = AgreementScorer(Z_MAX)
    agreements = []
    for q in (0.0, 0.05):
        for b in (3.0, 5.0):
            for f in (PenaltySpec.one(), PenaltySpec.exp_deficit(0.5)):
                for law in (SeverityDistribution.point_mass(1.0), SeverityDistribution.exponential(1.0)):
                    formula = gerber_shiu.phi0(model, q, b, f, law).value
                    estimate = simulator.simulate_bv(model, 0.0, q, b, f, law, cfg)
                    agreements.append(scorer.score(formula, estimate.mean, estimate.std_error))
    summary = scorer.summarize(agreements)
    return {'passed': summary['n_failed'] == 0,
            'detail': f"{summary['n_compared'] - summary['n_failed']}/{summary['n_compared']} cells, "
                      f"max |z| = {summary['max_abs_z']:.2f}"}


def _unbounded_variation_agreement(model, args) -> Dict[str, Any]:
    law = SeverityDistribution.point_mass(1.0)
    clock = CreepClock(1.0)
    cfg = SimConfig(n_paths=args.ubv_paths, seed=args.seed, workers=args.workers,
                    euler_dt=1e-3, horizon=200.0)
    formula = gerber_shiu.phi0(model, 0.05, 4.0, PenaltySpec.one(), law, clock).value
    estimate = simulator.simulate_ubv(model, 0.0, 0.05, 4.0, PenaltySpec.one(), law, clock, cfg)
    agreement = AgreementScorer(Z_MAX).score(formula, estimate.mean, estimate.std_error)
    return {'passed': agreement.passed,
            'detail': f"formula {formula:.6f}, MC {estimate.mean:.6f} +/- {estimate.std_error:.1e}, "
                      f"z = {agreement.z:.2f}"}


def check_brownian(args) -> Dict[str, Any]:
    """Pure diffusion against the Euler simulator at dt and dt/2"""
    return _unbounded_variation_agreement(model_families()['brownian_drift'], args)


def check_jump_diffusion(args) -> Dict[str, Any]:
    """Jump-diffusion against the Euler simulator at dt and dt/2"""
    return _unbounded_variation_agreement(model_families()['jump_diffusion'], args)


def random_bounded_variation_configs(seed: int, n: int):
    """Cramér-Lundberg models with one or two claim components and a random query"""
    rng = np.random.default_rng(seed)
    for _ in range(n):
        n_components = int(rng.integers(1, 3))
        rates = rng.uniform(0.5, 3.0, n_components)
        weights = rng.dirichlet(np.ones(n_components))
        jump_rate = rng.uniform(0.5, 2.0)
        mean_claim = float(np.sum(weights / rates))
        premium = jump_rate * mean_claim * (1.0 + rng.uniform(0.1, 1.0))
        model = levy_model.cramer_lundberg(premium, jump_rate, list(zip(weights.tolist(), rates.tolist())))
        if rng.random() < 0.5:
            law = SeverityDistribution.point_mass(rng.uniform(0.1, 3.0))
        else:
            law = SeverityDistribution.exponential(rng.uniform(0.5, 3.0))
        yield model, float(rng.uniform(0.0, 0.2)), float(rng.uniform(1.0, 6.0)), law


def check_denominator_bound(args) -> Dict[str, Any]:
    """0 < denominator <= 1/W(0+) on random bounded variation configurations"""
    failures = 0
    for model, q, b, law in random_bounded_variation_configs(args.seed, SWEEP_SIZE):
        denominator = gerber_shiu.denominator_bv(model, q, b, law)
        bound = 1.0 / scale_engine.build_scale(model, q).w_zero
        if not 0 < denominator <= bound:
            failures += 1
            logger.warning(f"Denominator {denominator} outside (0, {bound}] for {model}, q={q}, b={b}, {law}")
    return {'passed': failures == 0, 'detail': f"{SWEEP_SIZE - failures}/{SWEEP_SIZE} within bound"}


def check_dominance(args) -> Dict[str, Any]:
    """Bankruptcy never comes more often than classical ruin"""
    worst = math.inf
    for model, q, b, law in random_bounded_variation_configs(args.seed, SWEEP_SIZE):
        value = gerber_shiu.phi0(model, q, b, PenaltySpec.one(), law).value
        classical = gerber_shiu.classical_gs(model, 0.0, q, b, PenaltySpec.one())
        worst = min(worst, classical - value)
    return {'passed': worst >= -DOMINANCE_MARGIN, 'detail': f"min(classical - phi) = {worst:.2e}"}


def check_brute_force_oracles(args) -> Dict[str, Any]:
    """Every formula term against its fixed-grid Riemann oracle"""
    bv = RiemannOracle(levy_model.cramer_lundberg(1.5, 1.0, [(1.0, 1.0)]), 0.05, 3.0,
                       PenaltySpec.exp_deficit(0.5), SeverityDistribution.point_mass(1.0))
    ubv = RiemannOracle(levy_model.jump_diffusion(1.0, 1.0, 0.5, [(1.0, 1.0)]), 0.05, 3.0,
                        PenaltySpec.one(), SeverityDistribution.point_mass(1.0), CreepClock(1.0))
    total = failed = 0
    for oracle in (bv, ubv):
        results = oracle.run_checks(x=1.0)
        total += results['total_terms']
        failed += results['failed']
    return {'passed': failed == 0, 'detail': f"{total - failed}/{total} terms within 5e-3"}


def check_determinism(args) -> Dict[str, Any]:
    """simulate is byte-identical across repeat runs and worker counts"""
    from config.settings import Settings
    from main import main as cli_main

    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        config = str(tmp_path / 'config.ini')
        settings = Settings(str(CONFIG_DIR / 'test_config.ini'))
        settings.set('LOGGING', 'log_file', str(tmp_path / 'acceptance.log'))
        settings.save(config)

        outputs = []
        for name, workers in (('a', 1), ('b', 1), ('c', 2)):
            out = tmp_path / f"{name}.csv"
            code = cli_main(['simulate', '--config', config, '--out', str(out), '--workers', str(workers)])
            if code != 0:
                return {'passed': False, 'detail': f"simulate exited with {code}"}
            outputs.append(out.read_bytes())

    identical = outputs[0] == outputs[1] == outputs[2]
    return {'passed': identical, 'detail': "identical" if identical else "outputs differ"}


CRITERIA: Dict[int, Callable] = {
    1: check_laplace_identity,
    2: check_inversion,
    3: check_two_sided_exit,
    4: check_zero_mark_reduction,
    5: check_bounded_variation_grid,
    6: check_brownian,
    7: check_jump_diffusion,
    8: check_denominator_bound,
    9: check_dominance,
    10: check_brute_force_oracles,
    11: check_determinism,
}


def run_criterion(number: int, args) -> Dict[str, Any]:
    check = CRITERIA[number]
    start_time = datetime.now()
    try:
        result = check(args)
    except DepthRuinError as e:
        logger.error(f"Criterion {number} failed: {type(e).__name__}: {e}")
        result = {'passed': False, 'detail': f"{type(e).__name__}: {e}"}
    result.update(number=number, description=check.__doc__.strip(),
                  seconds=(datetime.now() - start_time).total_seconds())
    return result


def print_summary(results: List[Dict[str, Any]]):
    print("ACCEPTANCE SUMMARY")
    print("=" * 100)
    for r in results:
        status = "PASS" if r['passed'] else "FAIL"
        print(f"{r['number']:>2}  {status}  {r['seconds']:7.1f}s  {r['description'][:48]:<48}  {r['detail']}")
    print("=" * 100)
    passed = sum(1 for r in results if r['passed'])
    print(f"{passed}/{len(results)} criteria passed")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="Run the desk-scale acceptance checks")
    parser.add_argument('--paths', type=int, default=200_000, help='Paths per bounded variation estimate')
    parser.add_argument('--ubv-paths', type=int, default=20_000, help='Paths per Euler estimate')
    parser.add_argument('--seed', type=int, default=20240101)
    parser.add_argument('--workers', type=int, default=0, help='0 = one per physical core')
    parser.add_argument('--only', type=int, nargs='+', choices=sorted(CRITERIA), help='Run only these criteria')
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.WARNING,
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    results = [run_criterion(number, args) for number in (args.only or sorted(CRITERIA))]
    print_summary(results)
    return 0 if all(r['passed'] for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
