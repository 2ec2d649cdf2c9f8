from abc import ABC
from concurrent.futures import ProcessPoolExecutor
from datetime import timedelta
from pathlib import Path
from time import perf_counter

import numpy as np
import pandas as pd

import vilenkinlab
from vilenkinlab.algebra.field import OperatorField, cond_exp
from vilenkinlab.algebra.matrix import operator_norm
from vilenkinlab.algebra.vilenkin import RadixSequence, VilenkinCharacters
from vilenkinlab.utils.common import (
    constant_table,
    derive_seed,
    parse_digits,
    parse_lacunary,
    random_values,
    read_frame,
    row_status,
    write_frame,
    write_json,
)


class BaseSuite(ABC):
    """
    Base class for verification suites. A suite checks a set of claims over
    random or exhaustive inputs at depths N and N + 1 and writes its reports.
    """

    name = None
    claims = ()
    deterministic = ()

    def __init__(
        self,
        radix=(2,),
        depth=3,
        fiber_dim=2,
        system='vilenkin-characters',
        lambda_count=8,
        lambda_range=1.0,
        lacunary='default',
        trials=1,
        seed=0,
        out='reports',
        budget=8192,
        n_jobs=1,
        quiet=False,
    ):
        """
        Initialize run configuration.
        Args:
            radix: Radix digit pattern, cycled or truncated to each depth.
            depth: Depth N, constants are fitted at N and N + 1.
            fiber_dim: Fiber matrix dimension d.
            system: Name of a system in vilenkinlab.systems
            lambda_count: Number of lambda levels per random input.
            lambda_range: Lambda levels span ||E_0 f|| * 10^[0, lambda_range].
            lacunary: `default` or a comma list / tuple of indices.
            trials: Random inputs per claim and depth.
            seed: Master seed, trial seeds derive from (seed, claim, depth, trial).
            out: Report directory.
            budget: Maximum M_(N+1) * fiber_dim.
            n_jobs: Worker processes, trials run in parallel when > 1.
            quiet: If True, all suite messages will be silenced.
        """
        assert (
            system in vilenkinlab.systems
        ), f'Unknown system `{system}`, expected one of {sorted(vilenkinlab.systems)}'
        assert depth >= 1, f'Expected depth >= 1, got {depth}'
        assert fiber_dim >= 1, f'Expected fiber_dim >= 1, got {fiber_dim}'
        assert trials >= 1, f'Expected trials >= 1, got {trials}'
        assert lambda_count >= 1, f'Expected lambda_count >= 1, got {lambda_count}'
        assert n_jobs >= 1, f'Expected n_jobs >= 1, got {n_jobs}'
        self.radix_pattern = parse_digits(radix)
        self.depth = depth
        self.fiber_dim = fiber_dim
        self.system_name = system
        self.system = vilenkinlab.systems[system]()
        self.lambda_count = lambda_count
        self.lambda_range = lambda_range
        self.lacunary = parse_lacunary(lacunary)
        self.trials = trials
        self.seed = seed
        self.out = Path(out)
        self.budget = budget
        self.n_jobs = n_jobs
        self.quiet = quiet
        self.id = self.name or self.__module__.split('.')[1]

    def display_message(self, *args, **kwargs):
        """
        Display messages to the console.
        Args:
            *args: args passed to print()
            **kwargs: kwargs passed to print()

        Returns:
            None
        """
        if not self.quiet:
            print(*args, **kwargs)

    def config(self):
        """
        Configuration recorded with every report, independent of n_jobs and quiet.
        """
        return {
            'suite': self.id,
            'radix': list(self.radix_pattern),
            'depth': self.depth,
            'fiber_dim': self.fiber_dim,
            'system': self.system_name,
            'lambda_count': self.lambda_count,
            'lambda_range': self.lambda_range,
            'lacunary': self.lacunary
            if isinstance(self.lacunary, str)
            else list(self.lacunary),
            'trials': self.trials,
            'seed': self.seed,
            'budget': self.budget,
        }

    def radix_at(self, depth):
        return RadixSequence.cycled(self.radix_pattern, depth)

    def depths(self):
        return self.depth, self.depth + 1

    def estimate(self, depth):
        """
        Memory estimate M_depth * fiber_dim checked against the budget.
        """
        return self.radix_at(depth).size * self.fiber_dim

    def check_budget(self):
        """
        Refuse to run if any depth exceeds the budget.

        Returns:
            None
        """
        for depth in self.depths():
            estimate = self.estimate(depth)
            assert estimate <= self.budget, (
                f'Depth {depth} of radix {self.radix_pattern} needs {estimate} '
                f'> budget {self.budget}'
            )

    def trial_count(self, claim):
        return 1 if claim in self.deterministic else self.trials

    def lambda_grid(self, f):
        """
        ||E_0 f|| * 10^linspace(0, lambda_range, lambda_count)
        """
        mean = float(operator_norm(cond_exp(f, 0).values[0]))
        return mean * 10 ** np.linspace(0, self.lambda_range, self.lambda_count)

    def random_field(self, radix, rng, positive=False):
        return OperatorField(radix, random_values(radix, self.fiber_dim, rng, positive))

    def factor_system(self):
        """
        Vilenkin characters for factor side claims, the configured system if it is one.
        """
        if isinstance(self.system, VilenkinCharacters):
            return self.system
        return VilenkinCharacters()

    def run_trial(self, claim, radix, rng):
        """
        Check a claim on one input.
        Args:
            claim: One of self.claims
            radix: RadixSequence at the trial depth.
            rng: numpy.random.Generator owned by the trial.

        Returns:
            list of row dicts with at least `lhs` and `rhs`.
        """
        raise NotImplementedError(
            f'run_trial() should be implemented by {self.__class__.__name__} subclasses'
        )

    def execute_trial(self, claim, depth, trial):
        """
        Run one trial with its derived seed, recording hard failures as FAIL rows.

        Returns:
            list of annotated rows.
        """
        sequence = derive_seed(self.seed, claim, depth, trial)
        seed = int(sequence.generate_state(1, np.uint32)[0])
        try:
            rows = self.run_trial(
                claim, self.radix_at(depth), np.random.default_rng(sequence)
            )
        except AssertionError as error:
            rows = [{'lhs': np.nan, 'rhs': np.nan, 'status': 'FAIL', 'failure': str(error)}]
        annotated = []
        for row in rows:
            row = {'claim': claim, 'depth': depth, 'trial': trial, 'seed': seed, **row}
            row['status'] = row_status(row)
            annotated.append(row)
        return annotated

    def jobs(self, claims):
        return [
            (claim, depth, trial)
            for claim in claims
            for depth in self.depths()
            for trial in range(self.trial_count(claim))
        ]

    def collect(self, claims):
        """
        Execute every (claim, depth, trial), in parallel if n_jobs > 1, and
        merge the rows in (claim, depth, trial) order.

        Returns:
            list of rows.
        """
        jobs = self.jobs(claims)
        if self.n_jobs > 1:
            with ProcessPoolExecutor(self.n_jobs) as executor:
                futures = [executor.submit(self.execute_trial, *job) for job in jobs]
                results = [future.result() for future in futures]
        else:
            results = [self.execute_trial(*job) for job in jobs]
        order = {claim: i for i, claim in enumerate(self.claims)}
        merged = sorted(
            zip(jobs, results), key=lambda item: (order[item[0][0]], *item[0][1:])
        )
        return [row for _, rows in merged for row in rows]

    def report_paths(self):
        return {
            'rows': self.out / f'{self.id}-rows.csv',
            'constants': self.out / f'{self.id}-constants.csv',
            'summary': self.out / f'{self.id}.json',
        }

    def write_reports(self, rows, constants):
        """
        Write rows, constants and the JSON summary to self.out.

        Returns:
            dict of report paths.
        """
        self.out.mkdir(parents=True, exist_ok=True)
        paths = self.report_paths()
        write_frame(pd.DataFrame(rows), paths['rows'])
        write_frame(constants, paths['constants'])
        failures = [row for row in rows if row['status'] == 'FAIL']
        write_json(
            {
                'config': self.config(),
                'status': 'FAIL' if failures else 'PASS',
                'failures': [
                    {
                        key: value
                        for key, value in row.items()
                        if not (isinstance(value, float) and np.isnan(value))
                    }
                    for row in failures
                ],
                'constants': constants.to_dict('records'),
            },
            paths['summary'],
        )
        return paths

    def run(self, fail_fast=False):
        """
        Check every claim at both depths and write the reports.
        Args:
            fail_fast: If True, claims after the first failing one are skipped.

        Returns:
            Exit status, 1 if any row failed, otherwise 0.
        """
        self.check_budget()
        start_time = perf_counter()
        rows, claims = [], []
        for claim in self.claims:
            claim_start = perf_counter()
            claim_rows = self.collect([claim])
            rows.extend(claim_rows)
            claims.append(claim)
            failures = sum(row['status'] == 'FAIL' for row in claim_rows)
            self.display_message(
                f'{self.id} {claim}: {len(claim_rows)} rows, depths {self.depths()}, '
                f'{self.trial_count(claim)} trials, {failures} failures, '
                f'{timedelta(seconds=perf_counter() - claim_start)}'
            )
            if fail_fast and failures:
                break
        constants = constant_table(rows, claims, self.depths())
        paths = self.write_reports(rows, constants)
        self.display_message(constants.to_markdown(index=False))
        self.display_message(
            f'{self.id} finished in {timedelta(seconds=perf_counter() - start_time)}, '
            f'reports in {paths["summary"].parent}'
        )
        return int(any(row['status'] == 'FAIL' for row in rows))

    def show(self, max_rows=20):
        """
        Display stored reports of this suite as markdown tables.
        Args:
            max_rows: Maximum rows displayed per report.

        Returns:
            Exit status, 1 if reports are missing or hold a FAIL row.
        """
        paths = self.report_paths()
        missing = [path.as_posix() for path in paths.values() if not path.exists()]
        assert not missing, f'Missing reports {missing}, run `vilenkinlab run {self.id}`'
        constants, rows = read_frame(paths['constants']), read_frame(paths['rows'])
        print(f'\n{self.id} constants\n')
        print(constants.fillna('-').to_markdown(index=False))
        print(f'\n{self.id} rows\n')
        print(rows.head(max_rows).fillna('-').to_markdown(index=False))
        return int((rows['status'] == 'FAIL').any())
