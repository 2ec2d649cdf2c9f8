import argparse
import json
import warnings

import pytest

import vilenkinlab
from vilenkinlab.cli import execute
from vilenkinlab.tests.utils import (
    CorruptedCharacters,
    assert_flags_displayed,
    get_expected_flags,
    small_run,
)


@pytest.mark.usefixtures('executor')
class TestExecutor:
    """
    Tests for command line options.
    """

    def test_display_section(self, section, capsys):
        """
        Check if appropriate flags are displayed in help menu.
        Args:
            section: Tuple of argument group name and respective dict of args.
            capsys: _pytest.capture.CaptureFixture
        """
        self.executor.display_section(*section)
        cap = capsys.readouterr().out
        assert_flags_displayed(cap, *section)

    @staticmethod
    def assert_base_displayed(cap):
        """
        Assert base help menu is displayed.
        Args:
            cap: Text displayed to the console.

        Returns:
            None
        """
        for keyword in [
            'vilenkinlab',
            'Usage',
            'vilenkinlab <command> <suite> [options]',
            'Available commands:',
            'Available suites:',
        ]:
            assert keyword in cap
        for suite_id in vilenkinlab.suites:
            assert suite_id in cap

    def test_display_commands(self, section, capsys):
        """
        Test basic and extended help display.
        Args:
            section: Tuple of argument group name and respective dict of args.
            capsys: _pytest.capture.CaptureFixture
        """
        self.executor.display_commands({section[0]: section[1]})
        cap = capsys.readouterr().out
        self.assert_base_displayed(cap)
        assert_flags_displayed(cap, *section)

    @staticmethod
    def arg_value(options):
        """
        Command line tokens and the expected parsed value of a flag.
        Args:
            options: Flag attributes.

        Returns:
            (list of tokens, expected value)
        """
        if options.get('action'):
            return [], True
        _type = options.get('type')
        if options.get('nargs'):
            items = [(_type or str)(item) for item in (3, 5, 8)]
            return [str(item) for item in items], items
        if _type in [int, float]:
            return ['7'], _type(7)
        return ['abcdef'], 'abcdef'

    def test_add_args(self, section):
        """
        Add given section to executor args, generate values, parse args
        and test if the values match.
        Args:
            section: Tuple of argument group name and respective dict of args.
        """
        parser = argparse.ArgumentParser()
        self.executor.add_args(section[1], parser)
        test_args, values = [], {}
        for flag, options in section[1].items():
            tokens, value = self.arg_value(options)
            test_args.extend([f'--{flag}', *tokens])
            values[flag] = value
        parsed_args = parser.parse_args(test_args)
        for attr, value in values.items():
            assert getattr(parsed_args, attr.replace('-', '_')) == value

    def test_maybe_create_suites_base_display(self, capsys):
        """
        Ensure only base help menu is displayed.
        Args:
            capsys: _pytest.capture.CaptureFixture
        """
        self.executor.maybe_create_suites([])
        cap = capsys.readouterr().out
        assert 'flags' not in cap
        self.assert_base_displayed(cap)
        assert self.executor.suite_ids is None

    def test_maybe_create_suites_invalid(self):
        """
        Ensure exceptions are raised for invalid commands and suites.
        """
        with pytest.raises(AssertionError, match=r'Invalid command'):
            self.executor.maybe_create_suites(['invalid'])
        with pytest.raises(AssertionError, match=r'Invalid suite'):
            self.executor.maybe_create_suites(['run', 'invalid'])

    def test_maybe_create_suites_help(self, command, suite_id, capsys):
        """
        Ensure command only / command + suite flags help is displayed accordingly.
        Args:
            command: One of the commands available in vilenkinlab.commands
            suite_id: One of the suite ids available in vilenkinlab.suites
            capsys: _pytest.capture.CaptureFixture
        """
        for argv in [[command], [command, suite_id, '--help']]:
            expected_flags = get_expected_flags(argv[:2])
            self.executor.maybe_create_suites(argv)
            cap = capsys.readouterr().out
            for flag in expected_flags:
                assert f'--{flag}' in cap
        assert self.executor.suite_ids is None

    def test_maybe_create_suites_no_display(self, command, suite_id, capsys):
        """
        Ensure nothing is displayed if the help menu is not invoked using
        relevant args.
        Args:
            command: One of the commands available in vilenkinlab.commands
            suite_id: One of the suite ids available in vilenkinlab.suites
            capsys: _pytest.capture.CaptureFixture
        """
        self.executor.maybe_create_suites([command, suite_id, '--depth', '2'])
        assert not capsys.readouterr().out
        assert self.executor.suite_ids == [suite_id]
        assert self.executor.command == command
        self.executor.maybe_create_suites([command, 'all'])
        assert self.executor.suite_ids == list(vilenkinlab.suites)

    def test_parse_known_args(self, command, suite_id):
        """
        Ensure config kwargs + suite kwargs + command kwargs match
        the expected ones given command and suite + minimum other flags.
        Args:
            command: One of the commands available in vilenkinlab.commands
            suite_id: One of the suite ids available in vilenkinlab.suites
        """
        self.executor.command = command
        self.executor.suite_ids = [suite_id]
        argv = [command, suite_id, '--depth', '2']
        config_known, suite_known, command_known = self.executor.parse_known_args(
            argv, suite_id
        )
        unknown_argv = argv + ['--unknown-flag', 'unknown-value']
        with pytest.warns(UserWarning, match=r'Got unknown'):
            self.executor.parse_known_args(unknown_argv, suite_id)
        actual = {**vars(config_known), **vars(suite_known), **vars(command_known)}
        assert set(get_expected_flags(argv, True)) == set(actual.keys())
        assert config_known.depth == 2

    def test_all_suppresses_suite_flags(self):
        """
        Flags of other suites are expected when running `all`.
        """
        self.executor.command = 'run'
        self.executor.suite_ids = list(vilenkinlab.suites)
        argv = ['run', 'all', '--lkl-samples', '4']
        with warnings.catch_warnings():
            warnings.simplefilter('error')
            self.executor.parse_known_args(argv, 'validate-system')
        with pytest.warns(UserWarning, match=r'Got unknown'):
            self.executor.parse_known_args(argv + ['--unknown-flag'], 'validate-system')


class TestCommands:
    """
    End to end runs through vilenkinlab.cli.execute
    """

    def test_run_writes_reports(self, tmp_path):
        status = execute(['run', 'validate-system', *small_run(tmp_path)])
        assert status == 0
        for name in (
            'validate-system-rows.csv',
            'validate-system-constants.csv',
            'validate-system.json',
        ):
            assert (tmp_path / name).exists()
        summary = json.loads((tmp_path / 'validate-system.json').read_text())
        assert summary['status'] == 'PASS'
        assert summary['config']['radix'] == [2, 3, 2]
        assert summary['failures'] == []

    def test_run_kernels(self, tmp_path):
        flags = small_run(tmp_path, '--depth', '3', '--lkl-samples', '4')
        argv = ['run', 'kernels', *flags]
        assert execute(argv) == 0
        summary = json.loads((tmp_path / 'kernels.json').read_text())
        claims = [row['claim'] for row in summary['constants']]
        assert claims[-1] == 'lkl-identity'

    def test_show(self, tmp_path, capsys):
        execute(['run', 'validate-system', *small_run(tmp_path)])
        capsys.readouterr()
        status = execute(
            ['show', 'validate-system', '--out', str(tmp_path), '--max-rows', '3']
        )
        cap = capsys.readouterr().out
        assert status == 0
        assert 'validate-system constants' in cap
        assert 'validate-system rows' in cap

    def test_show_missing_reports(self, tmp_path):
        with pytest.raises(AssertionError, match=r'Missing reports'):
            execute(['show', 'kernels', '--out', str(tmp_path)])

    def test_corrupted_system_fails(self, tmp_path, monkeypatch):
        monkeypatch.setitem(
            vilenkinlab.systems, 'vilenkin-characters', CorruptedCharacters
        )
        status = execute(['run', 'validate-system', *small_run(tmp_path)])
        assert status == 1
        summary = json.loads((tmp_path / 'validate-system.json').read_text())
        assert summary['status'] == 'FAIL'
        checks = {failure.get('check') for failure in summary['failures']}
        assert 'energy' in checks

    def test_budget_refusal(self, tmp_path):
        with pytest.raises(AssertionError, match=r'budget'):
            execute(['run', 'kernels', *small_run(tmp_path, '--budget', '4')])

    def test_reports_are_deterministic(self, tmp_path):
        outputs = [tmp_path / 'first', tmp_path / 'second']
        for out in outputs:
            execute(['run', 'cuculescu', *small_run(out, '--depth', '2')])
        for name in ('cuculescu-rows.csv', 'cuculescu-constants.csv', 'cuculescu.json'):
            assert (outputs[0] / name).read_bytes() == (outputs[1] / name).read_bytes()

    def test_help_only(self, capsys):
        assert execute(['run']) == 0
        assert '--fail-fast' in capsys.readouterr().out
