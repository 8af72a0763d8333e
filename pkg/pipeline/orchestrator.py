# depth_ruin/pipeline/orchestrator.py
"""
Query-grid orchestrator with parallel processing capabilities

Runs the formula side over the (x, q, b) grid in a process pool (falling back
to sequential evaluation), the Monte Carlo side query by query (each
simulation fans its blocks out on its own), and assembles the result rows the
CLI writes.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from itertools import product
from typing import Any, Dict, List, Tuple

from data.exceptions import DepthRuinError
from data.models import RunConfig, SeverityKind
from penalty import gerber_shiu
from processes import severity
from scoring.agreement_scorer import Agreement, AgreementScorer
from simulation import simulator

logger = logging.getLogger(__name__)

TERM_COLUMNS = ['A', 'B', 'C', 'D', 'E', 'F', 'J', 'U', 'R', 'sigma_block',
                'jump_below_mark', 'creep_after_clock', 'I', 'restart_creep', 'restart_jump', 'phi0']

COMPUTE_COLUMNS = ['x', 'q', 'b', 'value', 'numerator', 'denominator'] + TERM_COLUMNS + \
    ['classical_gs', 'quad_error', 'status']

SIMULATE_COLUMNS = ['x', 'q', 'b', 'mean', 'std_error', 'n_paths', 'n_bankrupt', 'n_upcrossed',
                    'n_censored', 'censored_bias_bound', 'mean_dt', 'se_dt', 'mean_dt_half',
                    'se_dt_half', 'status']

COMPARE_COLUMNS = ['x', 'q', 'b', 'phi_formula', 'phi_mc', 'mc_stderr', 'z', 'passed', 'status']

SWEEP_COLUMNS = ['axis', 'axis_value', 'x', 'q', 'b', 'y_scale', 'value', 'numerator',
                 'denominator', 'status']

SWEEP_AXES = ('x', 'q', 'b', 'y_scale')

Query = Tuple[float, float, float]


def is_classical_control(run: RunConfig) -> bool:
    """A point mass at 0 reduces bankruptcy to the classical ruin time."""
    return run.severity.kind is SeverityKind.POINT_MASS and run.severity.value == 0


def _error_status(error: Exception) -> str:
    return f"{type(error).__name__}: {error}"


def formula_row(run: RunConfig, x: float, q: float, b: float, y_scale: float = 1.0) -> Dict[str, Any]:
    """Formula value, term breakdown and classical reference for one query."""
    law = run.severity if y_scale == 1.0 else severity.scaled(run.severity, y_scale)
    row: Dict[str, Any] = {'x': x, 'q': q, 'b': b}
    try:
        if is_classical_control(run) and run.model.sigma > 0:
            value = gerber_shiu.classical_gs(run.model, x, q, b, run.penalty, run.quadrature)
            row.update(value=value, numerator=value, denominator=1.0, quad_error=0.0, classical_gs=value)
            row.update(dict.fromkeys(TERM_COLUMNS, ''))
        else:
            result = gerber_shiu.phi_x(run.model, x, q, b, run.penalty, law, run.clock,
                                       run.quadrature, run.creeping_kernel)
            row.update(value=result.value, numerator=result.numerator, denominator=result.denominator,
                       quad_error=result.error_estimate)
            row.update({key: result.terms.get(key, '') for key in TERM_COLUMNS})
            row['classical_gs'] = gerber_shiu.classical_gs(run.model, x, q, b, run.penalty, run.quadrature)
        row['status'] = 'ok'
    except DepthRuinError as e:
        if run.fail_fast:
            raise
        logger.error(f"Formula failed at x={x}, q={q}, b={b}: {e}")
        row.update({column: '' for column in COMPUTE_COLUMNS if column not in row})
        row['status'] = _error_status(e)
    return row


def _formula_task(task: Tuple[RunConfig, float, float, float, float]) -> Dict[str, Any]:
    run, x, q, b, y_scale = task
    return formula_row(run, x, q, b, y_scale)


class GerberShiuPipeline:
    """Runs compute / simulate / compare / sweep over the configured query grid"""

    def __init__(self, run: RunConfig):
        self.logger = logging.getLogger(__name__)
        self.run = run
        self.max_workers = simulator.resolve_workers(run.sim.workers)
        self.scorer = AgreementScorer(run.z_max)
        self.agreements: List[Agreement] = []

        self.logger.info(f"Pipeline initialized for {run.model.kind.value} "
                         f"({len(self.queries())} queries, workers: {self.max_workers})")

    def queries(self) -> List[Query]:
        """All (x, q, b) with x <= b, sorted lexicographically"""
        grid = {(float(x), float(q), float(b)) for x, q, b in product(self.run.xs, self.run.qs, self.run.bs)}
        return sorted(query for query in grid if query[0] <= query[2])

    def _map_formula(self, tasks: List[Tuple]) -> List[Dict[str, Any]]:
        """Evaluate formula tasks in a process pool, in task order"""
        if self.max_workers > 1 and len(tasks) > 1:
            try:
                with ProcessPoolExecutor(max_workers=min(self.max_workers, len(tasks))) as executor:
                    return list(executor.map(_formula_task, tasks))
            except (OSError, RuntimeError) as e:
                self.logger.warning(f"Parallel processing failed, falling back to sequential: {str(e)}")
        return [_formula_task(task) for task in tasks]

    def compute(self) -> List[Dict[str, Any]]:
        start_time = datetime.now()
        rows = self._map_formula([(self.run, x, q, b, 1.0) for x, q, b in self.queries()])
        total_time = (datetime.now() - start_time).total_seconds()
        self.logger.info(f"Computed {len(rows)} formula rows in {total_time:.2f}s")
        return rows

    def _simulate_query(self, x: float, q: float, b: float):
        run = self.run
        if is_classical_control(run):
            return simulator.estimate_classical(run.model, x, q, b, run.penalty, run.sim)
        return simulator.simulate(run.model, x, q, b, run.penalty, run.severity, run.clock, run.sim)

    def simulate(self) -> List[Dict[str, Any]]:
        rows = []
        for i, (x, q, b) in enumerate(self.queries(), 1):
            self.logger.info(f"Simulating query {i}/{len(self.queries())}: x={x}, q={q}, b={b}")
            row: Dict[str, Any] = {'x': x, 'q': q, 'b': b}
            try:
                estimate = self._simulate_query(x, q, b)
                report = estimate.discretization
                row.update(mean=estimate.mean, std_error=estimate.std_error, n_paths=estimate.n_paths,
                           n_bankrupt=estimate.n_bankrupt, n_upcrossed=estimate.n_upcrossed,
                           n_censored=estimate.n_censored, censored_bias_bound=estimate.censored_bias_bound,
                           mean_dt=report.mean_dt if report else '',
                           se_dt=report.se_dt if report else '',
                           mean_dt_half=report.mean_half if report else '',
                           se_dt_half=report.se_half if report else '',
                           status='ok')
            except DepthRuinError as e:
                if self.run.fail_fast:
                    raise
                self.logger.error(f"Simulation failed at x={x}, q={q}, b={b}: {e}")
                row.update({column: '' for column in SIMULATE_COLUMNS if column not in row})
                row['status'] = _error_status(e)
            rows.append(row)
        return rows

    def compare(self) -> List[Dict[str, Any]]:
        """Formula against Monte Carlo per query; the simulation barrier is shifted by [COMPARE] b_offset"""
        offset = self.run.simulation_b_offset
        formula = {(row['x'], row['q'], row['b']): row for row in self.compute()}

        self.agreements = []
        rows = []
        for x, q, b in self.queries():
            row: Dict[str, Any] = {'x': x, 'q': q, 'b': b}
            reference = formula[(x, q, b)]
            if reference['status'] != 'ok':
                row.update(phi_formula='', phi_mc='', mc_stderr='', z='', passed='',
                           status=reference['status'])
                rows.append(row)
                continue
            try:
                estimate = self._simulate_query(x, q, b + offset)
                value = reference['value']
                agreement = self.scorer.score(value, estimate.mean, estimate.std_error)
                self.agreements.append(agreement)
                row.update(phi_formula=value, phi_mc=estimate.mean, mc_stderr=estimate.std_error,
                           z=agreement.z, passed=agreement.passed, status='ok')
            except DepthRuinError as e:
                if self.run.fail_fast:
                    raise
                self.logger.error(f"Comparison failed at x={x}, q={q}, b={b}: {e}")
                row.update(phi_formula=reference['value'], phi_mc='', mc_stderr='', z='', passed='',
                           status=_error_status(e))
            rows.append(row)

        self.logger.info(f"Comparison summary: {self.scorer.summarize(self.agreements)}")
        return rows

    def sweep(self, axis: str) -> List[Dict[str, Any]]:
        """Long-format formula table with `axis` varying fastest"""
        if axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")

        keyed = []
        for x, q, b in self.queries():
            for y_scale in (self.run.y_scales if axis == 'y_scale' else [1.0]):
                coords = {'x': x, 'q': q, 'b': b, 'y_scale': y_scale}
                fixed = tuple(value for key, value in coords.items() if key != axis)
                keyed.append((fixed, coords[axis], (self.run, x, q, b, y_scale)))
        keyed.sort(key=lambda item: (item[0], item[1]))

        results = self._map_formula([task for _, _, task in keyed])
        rows = []
        for (_, axis_value, task), result in zip(keyed, results):
            _, x, q, b, y_scale = task
            rows.append({'axis': axis, 'axis_value': axis_value, 'x': x, 'q': q, 'b': b,
                         'y_scale': y_scale, 'value': result['value'], 'numerator': result['numerator'],
                         'denominator': result['denominator'], 'status': result['status']})
        self.logger.info(f"Sweep over {axis}: {len(rows)} rows")
        return rows

    def require_agreement(self) -> None:
        self.scorer.require_agreement(self.agreements)

