import numpy as np
import pandas as pd
import pytest

from vilenkinlab.algebra.reports import BoundReport, fit_constant
from vilenkinlab.utils.common import (
    ConfigReader,
    constant_table,
    derive_seed,
    identity_row,
    load_config,
    parse_digits,
    parse_lacunary,
    read_frame,
    row_status,
    write_frame,
)


@pytest.mark.parametrize(
    'pairs, expected',
    [
        ([(1, 2), (3, 3)], (1.0, 1)),
        ([(0, 5)], (0.0, 0)),
        ([(1, 0)], (0.0, None)),
        ([(2, 1), (4, 2), (1, 1)], (2.0, 0)),
    ],
)
def test_fit_constant(pairs, expected):
    """
    Test the fitted constant and the index of the first pair attaining it.
    Args:
        pairs: (lhs, rhs) pairs.
        expected: (c_hat, index)
    """
    assert fit_constant(pairs) == expected


def test_bound_report():
    rows = [{'lhs': 1, 'rhs': 2}, {'lhs': 3, 'rhs': 2}]
    report = BoundReport.from_rows('claim', rows, depth=3)
    assert report.status == 'PASS'
    assert (report.lhs, report.rhs, report.fitted_c) == (3.0, 2.0, 1.5)
    frame = report.frame()
    assert frame.columns.tolist() == ['claim', 'lhs', 'rhs', 'fitted_c', 'depth']
    assert report.summary()['count'] == 2
    assert BoundReport.from_rows('claim', [{'lhs': 0, 'rhs': 0}]).status == 'DEGENERATE'
    rows = [{'lhs': 1, 'rhs': 0}, {'lhs': 1, 'rhs': 1}]
    failed = BoundReport.from_rows('claim', rows)
    assert failed.status == 'FAIL'
    assert not failed.passed


@pytest.mark.parametrize(
    'row, expected',
    [
        ({'lhs': 1.0, 'rhs': 2.0}, 'PASS'),
        ({'lhs': 0.0, 'rhs': 0.0}, 'DEGENERATE'),
        ({'lhs': 1.0, 'rhs': 0.0}, 'FAIL'),
        ({'lhs': np.nan, 'rhs': 1.0}, 'FAIL'),
        ({'lhs': 1.0, 'rhs': 2.0, 'status': 'FAIL'}, 'FAIL'),
    ],
)
def test_row_status(row, expected):
    assert row_status(row) == expected


def test_identity_row():
    assert identity_row(1e-12, 1e-9, n=3) == {
        'n': 3,
        'lhs': 1e-12,
        'rhs': 1e-9,
        'status': 'PASS',
    }
    assert identity_row(1e-6, 1e-9)['status'] == 'FAIL'
    assert identity_row(np.nan, 1e-9)['status'] == 'FAIL'


def test_derive_seed():
    first = derive_seed(0, 'claim', 3, 0).generate_state(2)
    assert (first == derive_seed(0, 'claim', 3, 0).generate_state(2)).all()
    for other in [
        (1, 'claim', 3, 0),
        (0, 'other', 3, 0),
        (0, 'claim', 4, 0),
        (0, 'claim', 3, 1),
    ]:
        assert (first != derive_seed(*other).generate_state(2)).any()


def test_parse_values():
    assert parse_digits('2, 3,2') == (2, 3, 2)
    assert parse_digits([4]) == (4,)
    with pytest.raises(AssertionError, match=r'Empty radix'):
        parse_digits('')
    assert parse_lacunary('1,2,4') == (1, 2, 4)
    assert parse_lacunary(None) == 'default'
    assert parse_lacunary(' default') == 'default'


def test_load_config(tmp_path):
    """
    Test suite defaults < --config file < explicit command line values.
    Args:
        tmp_path: pathlib.PosixPath
    """
    cfg = tmp_path / 'run.cfg'
    cfg.write_text('[run]\ndepth = 2\nfiber-dim = 3\nquiet = true\n')
    options = load_config('validate-system', {'config': cfg, 'depth': None})
    assert options['radix'] == (2, 3, 2)
    assert options['depth'] == 2
    assert options['fiber_dim'] == 3
    assert options['quiet'] is True
    cli_kwargs = {'config': cfg, 'depth': 4, 'quiet': False}
    options = load_config('validate-system', cli_kwargs)
    assert options['depth'] == 4
    assert options['quiet'] is True
    with pytest.raises(AssertionError, match=r'Invalid suite'):
        load_config('unknown', {})


def test_config_reader_errors(tmp_path):
    missing_section = tmp_path / 'missing.cfg'
    missing_section.write_text('[other]\ndepth = 2\n')
    with pytest.raises(AssertionError, match=r'No \[run\] section'):
        ConfigReader(missing_section)
    unknown_key = tmp_path / 'unknown.cfg'
    unknown_key.write_text('[run]\nwidth = 2\n')
    with pytest.raises(AssertionError, match=r'Unknown key `width`'):
        ConfigReader(unknown_key).options()


def test_constant_table():
    fields = ('claim', 'depth', 'seed', 'lhs', 'rhs', 'status')
    rows = [
        {'trial': 0, **dict(zip(fields, values))}
        for values in [
            ('a', 3, 5, 1.0, 1.0, 'PASS'),
            ('a', 4, 6, 3.0, 1.0, 'PASS'),
            ('b', 3, 7, 1.0, 1.0, 'PASS'),
            ('b', 4, 8, np.nan, np.nan, 'FAIL'),
        ]
    ]
    table = constant_table(rows, ['a', 'b'], (3, 4)).set_index('claim')
    assert table.loc['a', 'stability'] == pytest.approx(3)
    assert table.loc['a', 'stable'] == 'UNSTABLE'
    assert table.loc['a', 'worst_seed'] == 6
    assert table.loc['b', 'stable'] == 'SINGLE-DEPTH'
    assert table.loc['b', 'failures'] == 1
    single = constant_table(rows[:1], ['a'], (3,))
    assert single.loc[0, 'fitted_c_n1'] is None


def test_write_frame(tmp_path):
    path = tmp_path / 'frame.csv'
    write_frame(pd.DataFrame({'value': [1 / 3]}), path)
    assert read_frame(path)['value'][0] == 1 / 3
    assert path.read_text().endswith('\n')
