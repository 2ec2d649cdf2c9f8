import configparser
import json
import zlib
from pathlib import Path

import numpy as np
import pandas as pd

import vilenkinlab
from vilenkinlab.algebra.matrix import Projection, symmetrize
from vilenkinlab.algebra.reports import DEGENERATE_RHS, fit_constant
from vilenkinlab.utils.cli import config_args

FLOAT_FORMAT = '%.17g'
POSITIVE_RIDGE = 1e-6


class ConfigReader:
    """
    RunConfig values from a .cfg file with a single [run] section.
    """

    def __init__(self, cfg_file, section='run'):
        """
        Initialize config parser.
        Args:
            cfg_file: Path to .cfg file.
            section: Section holding the run configuration.
        """
        self.cfg_file = cfg_file
        with open(cfg_file) as cfg:
            self.parser = configparser.ConfigParser()
            self.parser.read_file(cfg)
        assert self.parser.has_section(
            section
        ), f'No [{section}] section in {cfg_file}'
        self.section = section

    def parse_value(self, key, value):
        """
        Convert a raw value according to the `cfg_type` of its flag.
        Args:
            key: Flag name, e.g. `fiber-dim`
            value: Raw string.

        Returns:
            Parsed value.
        """
        assert key in config_args, f'Unknown key `{key}` in {self.cfg_file}'
        return parse_option(config_args[key].get('cfg_type', 'str'), value)

    def options(self):
        """
        Parsed [run] entries with underscored keys.

        Returns:
            dict
        """
        return {
            key.replace('-', '_'): self.parse_value(key, value)
            for key, value in self.parser[self.section].items()
        }


def parse_digits(value):
    if isinstance(value, str):
        value = [item for item in value.replace(' ', '').split(',') if item]
    digits = tuple(int(item) for item in value)
    assert digits, 'Empty radix'
    assert all(digit >= 2 for digit in digits), f'Radix digits must be >= 2, got {digits}'
    return digits


def parse_option(cfg_type, value):
    if value is None:
        return None
    if cfg_type == 'digits':
        return parse_digits(value)
    if cfg_type == 'int':
        return int(value)
    if cfg_type == 'float':
        return float(value)
    if cfg_type == 'bool':
        if isinstance(value, bool):
            return value
        return str(value).strip().lower() in ('1', 'true', 'yes', 'on')
    return str(value).strip()


def parse_lacunary(value):
    """
    `default` or a comma list of indices.
    """
    if value is None or str(value).strip() == 'default':
        return 'default'
    return tuple(int(item) for item in str(value).split(',') if item.strip())


def register_configs(suites):
    """
    Register the default configuration file found in every suite `configs`
    folder to be added to vilenkinlab.suites.
    Args:
        suites: vilenkinlab.suites

    Returns:
        None
    """
    for suite_data in suites.values():
        configs_folder = Path(suite_data['module'].__file__).parent / 'configs'
        default = configs_folder / 'default.cfg'
        if default.exists():
            suite_data['config'] = default.as_posix()


def load_config(suite_id, cli_kwargs):
    """
    Merge suite defaults < --config file < explicit command line values.
    Args:
        suite_id: One of the suite ids available in vilenkinlab.suites
        cli_kwargs: Parsed command line values, None where not given.

    Returns:
        dict of BaseSuite keyword arguments.
    """
    assert suite_id in vilenkinlab.suites, f'Invalid suite `{suite_id}`'
    options = {}
    default = vilenkinlab.suites[suite_id].get('config')
    if default:
        options.update(ConfigReader(default).options())
    cli_kwargs = dict(cli_kwargs)
    config_file = cli_kwargs.pop('config', None)
    if config_file:
        options.update(ConfigReader(config_file).options())
    for key, value in cli_kwargs.items():
        flag = key.replace('_', '-')
        if flag not in config_args or value is None:
            continue
        if config_args[flag].get('action') == 'store_true' and not value:
            continue
        options[key] = parse_option(config_args[flag].get('cfg_type', 'str'), value)
    return options


def create_suite(suite_id, cli_kwargs, suite_kwargs=None):
    """
    Create a suite with merged configuration.
    Args:
        suite_id: One of the suite ids available in vilenkinlab.suites
        cli_kwargs: Parsed command line values of config_args
        suite_kwargs: Values of the suite specific flags, passed as they are.

    Returns:
        BaseSuite subclass instance.
    """
    options = load_config(suite_id, cli_kwargs)
    options.update(suite_kwargs or {})
    return vilenkinlab.suites[suite_id]['suite'](**options)


def derive_seed(seed, claim, depth, trial):
    """
    Independent seed sequence per (master seed, claim, depth, trial).
    """
    return np.random.SeedSequence([seed, zlib.crc32(claim.encode()), depth, trial])


def random_operator(dim, rng):
    """
    Complex Gaussian d x d matrix.
    """
    return rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))


def random_values(radix, fiber_dim, rng, positive=False):
    """
    Complex Gaussian values per point, or g* g + 1e-6 when positive.
    Args:
        radix: RadixSequence
        fiber_dim: d
        rng: numpy.random.Generator
        positive: If True, values are strictly positive.

    Returns:
        numpy array of shape (M_N, d, d)
    """
    shape = (radix.size, fiber_dim, fiber_dim)
    values = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if positive:
        square = np.conj(np.swapaxes(values, -1, -2)) @ values
        values = symmetrize(square) + POSITIVE_RIDGE * np.eye(fiber_dim)
    return values


def random_projection(dim, rng):
    """
    Projection onto the span of a random nonempty set of random vectors.
    """
    rank = int(rng.integers(1, dim + 1))
    vectors, _ = np.linalg.qr(random_operator(dim, rng))
    basis = vectors[:, :rank]
    return Projection(basis @ np.conj(basis.T))


def write_frame(frame, path):
    """
    Write a DataFrame to .csv with full float precision.
    Args:
        frame: pandas.DataFrame
        path: Path to .csv file.

    Returns:
        None
    """
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def write_json(data, path):
    """
    Write a dict to .json with sorted keys.
    """
    with open(path, 'w') as output:
        json.dump(data, output, sort_keys=True, indent=2, default=str)
        output.write('\n')


def read_frame(path):
    return pd.read_csv(path)


def row_status(row):
    """
    PASS, FAIL or DEGENERATE for a sweep row; an explicit `status` wins.
    A row with rhs 0 but lhs > 0 or with non finite sides fails.
    """
    if row.get('status'):
        return row['status']
    lhs, rhs = row.get('lhs', np.nan), row.get('rhs', np.nan)
    if not (np.isfinite(lhs) and np.isfinite(rhs)):
        return 'FAIL'
    if rhs <= DEGENERATE_RHS:
        return 'FAIL' if lhs > DEGENERATE_RHS else 'DEGENERATE'
    return 'PASS'


def fit_rows(rows):
    """
    Fitted constant over the finite rows and the seed of the worst row.
    Returns:
        (c_hat or None if no row exists, worst seed or None)
    """
    rows = [
        row
        for row in rows
        if np.isfinite(row.get('lhs', np.nan)) and np.isfinite(row.get('rhs', np.nan))
    ]
    if not rows:
        return None, None
    c_hat, index = fit_constant([(row['lhs'], row['rhs']) for row in rows])
    return c_hat, rows[index]['seed'] if index is not None else None


def stability_label(ratio, threshold):
    if np.isnan(ratio):
        return 'SINGLE-DEPTH'
    return 'UNSTABLE' if ratio > threshold else 'STABLE'


def constant_table(rows, claims, depths, stability_ratio=2.0):
    """
    One row per claim with constants fitted at both depths, their ratio and
    the worst input seed.
    Args:
        rows: Annotated sweep rows with claim, depth, trial and seed.
        claims: Claim ids in report order.
        depths: Depths the suite ran at, (N, N + 1) or (N,)
        stability_ratio: Ratios above this are flagged UNSTABLE.

    Returns:
        pandas.DataFrame
    """
    table = []
    for claim in claims:
        claim_rows = [row for row in rows if row['claim'] == claim]
        fits = [
            fit_rows([row for row in claim_rows if row['depth'] == depth])
            for depth in depths
        ]
        known = [fit for fit in fits if fit[0] is not None]
        worst = max(known, key=lambda fit: fit[0])[1] if known else None
        ratio = np.nan
        if len(known) == 2:
            low, high = sorted(fit[0] for fit in known)
            ratio = high / low if low > 0 else (1.0 if high == 0 else np.inf)
        table.append(
            {
                'claim': claim,
                'fitted_c_n': fits[0][0],
                'fitted_c_n1': fits[1][0] if len(fits) > 1 else None,
                'stability': ratio,
                'stable': stability_label(ratio, stability_ratio),
                'trials': len({row['trial'] for row in claim_rows}),
                'rows': len(claim_rows),
                'failures': sum(row['status'] == 'FAIL' for row in claim_rows),
                'worst_seed': worst,
            }
        )
    return pd.DataFrame(table)


def identity_row(residual, tolerance, **columns):
    """
    Row of an exact identity: residual against its tolerance.
    """
    residual = float(residual)
    status = 'PASS' if np.isfinite(residual) and residual <= tolerance else 'FAIL'
    return {**columns, 'lhs': residual, 'rhs': tolerance, 'status': status}
