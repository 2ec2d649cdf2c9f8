import numpy as np
import pytest

import vilenkinlab
from vilenkinlab.algebra.factor import FactorContext
from vilenkinlab.algebra.field import OperatorField
from vilenkinlab.algebra.vilenkin import (
    AdicCharacters,
    KernelBank,
    RadixSequence,
    VilenkinCharacters,
)
from vilenkinlab.cli import Executor
from vilenkinlab.utils.cli import config_args, run_args, show_args
from vilenkinlab.utils.common import random_values


@pytest.fixture(scope='function')
def executor(request):
    """
    Fixture for testing command line options.
    Args:
        request: _pytest.fixtures.SubRequest

    Returns:
        vilenkinlab.cli.Executor
    """
    request.cls.executor = Executor()


@pytest.fixture(
    params=[
        ('config', config_args),
        ('run', run_args),
        ('show', show_args),
        *[
            (suite_id, suite_data['module'].cli_args)
            for suite_id, suite_data in vilenkinlab.suites.items()
        ],
        ('do-nothing', {}),
    ]
)
def section(request):
    """
    Fixture for testing help menu and parsing sanity.
    Args:
        request: _pytest.fixtures.SubRequest

    Yields:
        Tuple of argument group name and respective dict of args.
    """
    yield request.param


@pytest.fixture(params=[command for command in vilenkinlab.commands])
def command(request):
    """
    Fixture with commands available in vilenkinlab.commands
    Args:
        request: _pytest.fixtures.SubRequest

    Yields:
        Command as str
    """
    yield request.param


@pytest.fixture(params=[suite_id for suite_id in vilenkinlab.suites])
def suite_id(request):
    """
    Fixture with suite ids available in vilenkinlab.suites
    Args:
        request: _pytest.fixtures.SubRequest

    Yields:
        Suite id as str
    """
    yield request.param


@pytest.fixture(params=[VilenkinCharacters, AdicCharacters])
def system(request):
    """
    Fixture with the built in character systems.
    Args:
        request: _pytest.fixtures.SubRequest

    Yields:
        VilenkinLikeSystem instance.
    """
    yield request.param()


@pytest.fixture(scope='class')
def radixes(request):
    """
    Fixture of the classical depth 3 radix and the mixed radix (2, 3, 2).
    Args:
        request: _pytest.fixtures.SubRequest

    Returns:
        None
    """
    request.cls.dyadic = RadixSequence((2, 2, 2))
    request.cls.mixed = RadixSequence((2, 3, 2))


@pytest.fixture(scope='class')
def bank(request):
    """
    Fixture of the Walsh kernel bank at depth 4.
    Args:
        request: _pytest.fixtures.SubRequest

    Returns:
        None
    """
    request.cls.bank = KernelBank(VilenkinCharacters(), RadixSequence((2, 2, 2, 2)))


@pytest.fixture(scope='class')
def context(request):
    """
    Fixture of the factor truncation R_3 with radix all 2.
    Args:
        request: _pytest.fixtures.SubRequest

    Returns:
        None
    """
    request.cls.context = FactorContext(RadixSequence((2, 2, 2)))
    request.cls.characters = VilenkinCharacters()


@pytest.fixture(scope='function')
def rng():
    """
    Fixture of a seeded generator, fresh for every test.

    Returns:
        numpy.random.Generator
    """
    return np.random.default_rng(1234)


@pytest.fixture(scope='function')
def fields(request, rng):
    """
    Fixture of a general and a positive field over radix all 2 with d = 2.
    Args:
        request: _pytest.fixtures.SubRequest
        rng: numpy.random.Generator

    Returns:
        None
    """
    radix = RadixSequence((2, 2, 2))
    request.cls.general = OperatorField(radix, random_values(radix, 2, rng))
    request.cls.positive = OperatorField(radix, random_values(radix, 2, rng, True))
