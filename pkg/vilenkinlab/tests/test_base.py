"""PYTEST_DONT_REWRITE"""

import numpy as np
import pytest

import vilenkinlab
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import create_suite, read_frame


class DummySuite(BaseSuite):
    """
    Lightweight suite for testing the trial machinery.
    """

    name = 'dummy'
    claims = ('ratio', 'broken')
    deterministic = ('broken',)

    def run_trial(self, claim, radix, rng):
        """
        One random ratio row, or a hard failure for `broken`.
        """
        assert claim != 'broken', 'Broken claim'
        return [{'lhs': float(rng.uniform()), 'rhs': 1.0, 'size': radix.size}]


class TestBaseSuite:
    def test_invalid_configuration(self):
        with pytest.raises(AssertionError, match=r'Unknown system'):
            DummySuite(system='haar')
        with pytest.raises(AssertionError, match=r'depth >= 1'):
            DummySuite(depth=0)
        with pytest.raises(AssertionError, match=r'Radix digits must be >= 2'):
            DummySuite(radix='2,1')

    def test_config(self):
        suite = DummySuite(radix='2,3', n_jobs=3, quiet=True, lacunary='1,2')
        config = suite.config()
        assert config['radix'] == [2, 3]
        assert config['lacunary'] == [1, 2]
        assert 'n_jobs' not in config and 'quiet' not in config
        assert suite.radix_at(3).digits == (2, 3, 2)
        assert suite.depths() == (3, 4)

    def test_display_message(self, capsys):
        DummySuite(quiet=True).display_message('hidden')
        DummySuite().display_message('shown')
        cap = capsys.readouterr().out
        assert 'hidden' not in cap
        assert 'shown' in cap

    def test_budget(self):
        suite = DummySuite(radix=(2,), depth=3, fiber_dim=2, budget=16)
        with pytest.raises(AssertionError, match=r'Depth 4 .* needs 32 > budget 16'):
            suite.check_budget()
        DummySuite(radix=(2,), depth=3, fiber_dim=2, budget=32).check_budget()

    def test_trials(self):
        suite = DummySuite(trials=3)
        assert suite.trial_count('ratio') == 3
        assert suite.trial_count('broken') == 1
        assert len(suite.jobs(suite.claims)) == 2 * 3 + 2

    def test_execute_trial(self):
        suite = DummySuite(seed=5)
        rows = suite.execute_trial('ratio', 3, 0)
        assert rows == suite.execute_trial('ratio', 3, 0)
        assert rows[0]['status'] == 'PASS'
        assert rows[0]['size'] == 8
        assert rows[0]['seed'] != suite.execute_trial('ratio', 3, 1)[0]['seed']
        failed = suite.execute_trial('broken', 3, 0)
        assert failed[0]['status'] == 'FAIL'
        assert failed[0]['failure'] == 'Broken claim'

    def test_lambda_grid(self):
        suite = DummySuite(radix=(2,), depth=2, lambda_count=3, lambda_range=2.0)
        radix = suite.radix_at(2)
        f = suite.random_field(radix, np.random.default_rng(0), positive=True)
        grid = suite.lambda_grid(f)
        assert len(grid) == 3
        assert grid[2] / grid[0] == pytest.approx(100)

    def test_run_and_show(self, tmp_path, capsys):
        suite = DummySuite(out=tmp_path, trials=2)
        assert suite.run() == 1
        rows = read_frame(suite.report_paths()['rows'])
        assert rows['claim'].tolist() == ['ratio'] * 4 + ['broken'] * 2
        assert suite.show(max_rows=2) == 1
        assert 'dummy constants' in capsys.readouterr().out

    def test_fail_fast(self, tmp_path):
        DummySuite.claims = ('broken', 'ratio')
        try:
            suite = DummySuite(out=tmp_path)
            assert suite.run(fail_fast=True) == 1
            rows = read_frame(suite.report_paths()['rows'])
            assert set(rows['claim']) == {'broken'}
        finally:
            DummySuite.claims = ('ratio', 'broken')


def test_create_suites(suite_id):
    """
    Every registered suite can be created from its defaults and fits the
    default budget.
    Args:
        suite_id: One of the suite ids available in vilenkinlab.suites
    """
    suite = create_suite(suite_id, {})
    assert isinstance(suite, vilenkinlab.suites[suite_id]['suite'])
    assert suite.id == suite_id
    suite.check_budget()
