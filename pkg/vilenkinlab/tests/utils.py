import vilenkinlab
from vilenkinlab.algebra.vilenkin import VilenkinCharacters
from vilenkinlab.utils.cli import config_args


class CorruptedCharacters(VilenkinCharacters):
    """
    Vilenkin characters with r_0^1 scaled by 1.1, violating the energy axiom.
    """

    def generator(self, k, n, points, radix):
        values = super(CorruptedCharacters, self).generator(k, n, points, radix)
        if (k, n) == (0, 1):
            return values * 1.1
        return values


def get_expected_flags(argv, as_kwargs=False):
    """
    Convert argv to expected flags/keyword that should be present
    as argparse.Namespace attributes.
    Args:
        argv: Arguments passed.
        as_kwargs: If True example-flag1 will be returned as example_flag1

    Returns:
        List of ['example-flag1', 'example-flag2', ...]
        or
        list of ['example_flag1', 'example_flag2']
    """
    if not argv:
        return []
    command = argv[0]
    expected_kwargs = {}
    expected_kwargs.update(config_args)
    expected_kwargs.update(vilenkinlab.commands[command][0])
    if len(argv) > 1:
        expected_kwargs.update(vilenkinlab.suites[argv[1]]['module'].cli_args)
    if not as_kwargs:
        return expected_kwargs.keys()
    return [flag.replace('-', '_') for flag in expected_kwargs.keys()]


def assert_flags_displayed(cap, title, cli_args):
    """
    Assert title and respective flags are present in help menu.
    Args:
        cap: str, text displayed to the console
        title: str, that should be present in cap representing
            the title of the group of argument group.
        cli_args: A dictionary of flags and their attributes.

    Returns:
        None
    """
    assert title in cap
    for flag in cli_args:
        assert f'--{flag}' in cap
        for key in cli_args[flag]:
            if key in ['help', 'cfg_type']:
                assert str(cli_args[flag][key]) in cap


def small_run(out, *flags):
    """
    argv tail of a quick run writing to `out`.
    """
    return ['--out', str(out), '--quiet', '--trials', '2', *flags]
