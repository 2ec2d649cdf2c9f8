import argparse
import sys
import warnings

import pandas as pd

import vilenkinlab
from vilenkinlab.utils.cli import config_args
from vilenkinlab.utils.common import create_suite


class Executor:
    """
    Command line parser.
    """

    def __init__(self):
        """
        Initialize supported commands and suites.
        """
        self.suite_ids = None
        self.command = None
        self.suites = []

    @staticmethod
    def display_section(title, cli_args):
        """
        Display given title (command) and respective available options.
        Args:
            title: Command(s) that will be displayed on top of cli options.
            cli_args: A dictionary having flags and their respective
                `help`, `default` and `cfg_type`

        Returns:
            None
        """
        section_frame = pd.DataFrame(cli_args).T.fillna('-')
        section_frame['flags'] = section_frame.index.values
        section_frame['flags'] = section_frame['flags'].apply(lambda flag: f'--{flag}')
        section_frame = (
            section_frame.reset_index(drop=True).set_index('flags').sort_index()
        )
        print(f'\n{title}\n')
        print(
            section_frame[
                [
                    column_name
                    for column_name in ('help', 'default', 'cfg_type')
                    if column_name in section_frame.columns
                ]
            ].to_markdown()
        )

    def display_commands(self, sections=None):
        """
        Display available commands, suites and their description
            + command specific sections if given any.
        Args:
            sections: A dictionary having titles and their respective flags.

        Returns:
            None
        """
        print(f'vilenkinlab {vilenkinlab.__version__}')
        print(f'\nUsage:')
        print(f'\tvilenkinlab <command> <suite> [options]')
        print(f'\nAvailable commands:')
        for command, items in vilenkinlab.commands.items():
            print(f'\t{command:<10} {items[2]}')
        print(f'\nAvailable suites:')
        for suite_id, suite_data in vilenkinlab.suites.items():
            print(f'\t{suite_id:<16} {", ".join(suite_data["suite"].claims)}')
        print(f'\t{"all":<16} every suite above in order')
        print()
        print('Use vilenkinlab <command> to see more info about a command')
        print('Use vilenkinlab <command> <suite> --help to see more info about command + suite')
        if sections:
            for title, cli_args in sections.items():
                self.display_section(title, cli_args)

    @staticmethod
    def add_args(cli_args, parser):
        """
        Add given arguments to parser.
        Args:
            cli_args: A dictionary of args and options.
            parser: argparse.ArgumentParser

        Returns:
            None.
        """
        for arg, options in cli_args.items():
            _help = options.get('help')
            _default = options.get('default')
            _type = options.get('type')
            _action = options.get('action')
            _required = options.get('required')
            _nargs = options.get('nargs')
            if not _action:
                parser.add_argument(
                    f'--{arg}',
                    help=_help,
                    default=_default,
                    type=_type,
                    required=_required,
                    nargs=_nargs,
                )
            else:
                parser.add_argument(
                    f'--{arg}', help=_help, default=_default, action=_action
                )

    def maybe_create_suites(self, argv):
        """
        Display help respective to parsed commands or set self.suite_ids and
        self.command for further execution if enough arguments are given.
        Args:
            argv: Arguments passed through sys.argv or otherwise.

        Returns:
            None
        """
        to_display = {}
        total = len(argv)
        if total == 0:
            self.display_commands()
            return
        command = argv[0]
        to_display.update(config_args)
        assert command in vilenkinlab.commands, f'Invalid command `{command}`'
        to_display.update(vilenkinlab.commands[command][0])
        if total == 1:
            self.display_commands({command: to_display})
            return
        suite_id = argv[1]
        assert (
            suite_id in vilenkinlab.suites or suite_id == 'all'
        ), f'Invalid suite `{suite_id}`'
        suite_ids = list(vilenkinlab.suites) if suite_id == 'all' else [suite_id]
        if '--help' in argv or '-h' in argv:
            for listed in suite_ids:
                to_display.update(vilenkinlab.suites[listed]['module'].cli_args)
            self.display_commands({f'{command} {suite_id}': to_display})
            return
        self.command, self.suite_ids = command, suite_ids

    def parse_known_args(self, argv, suite_id):
        """
        Parse general, suite and command specific args.
        Args:
            argv: Arguments passed through sys.argv or otherwise.
            suite_id: One of the suite ids available in vilenkinlab.suites

        Returns:
            config kwargs, suite kwargs and command kwargs.
        """
        config_parser = argparse.ArgumentParser()
        suite_parser = argparse.ArgumentParser()
        command_parser = argparse.ArgumentParser()
        self.add_args(config_args, config_parser)
        self.add_args(vilenkinlab.suites[suite_id]['module'].cli_args, suite_parser)
        self.add_args(vilenkinlab.commands[self.command][0], command_parser)
        config_known, extra1 = config_parser.parse_known_args(argv)
        suite_known, extra2 = suite_parser.parse_known_args(argv)
        command_known, extra3 = command_parser.parse_known_args(argv)
        unknown_flags = [
            unknown_flag
            for unknown_flag in set(extra1) & set(extra2) & set(extra3)
            if unknown_flag not in [self.command, argv[1]] and '--' in unknown_flag
        ]
        if unknown_flags and not self.all_suite_flag(unknown_flags):
            warnings.warn(f'Got unknown flags {sorted(unknown_flags)}')
        return config_known, suite_known, command_known

    def all_suite_flag(self, flags):
        """
        Whether every flag belongs to one of the selected suites, which is
        expected when running `all`.
        """
        if len(self.suite_ids) == 1:
            return False
        known = {
            f'--{flag}'
            for suite_id in self.suite_ids
            for flag in vilenkinlab.suites[suite_id]['module'].cli_args
        }
        return all(flag.split('=')[0] in known for flag in flags)

    def execute(self, argv):
        """
        Parse command line arguments, display help or execute command
        if enough arguments are given.
        Args:
            argv: Arguments passed through sys.argv or otherwise.

        Returns:
            Exit status, the largest returned by the executed suites.
        """
        self.maybe_create_suites(argv)
        if not self.suite_ids:
            return 0
        status = 0
        for suite_id in self.suite_ids:
            config_known, suite_known, command_known = self.parse_known_args(
                argv, suite_id
            )
            suite = create_suite(suite_id, vars(config_known), vars(suite_known))
            self.suites.append(suite)
            status = max(
                status,
                getattr(suite, vilenkinlab.commands[self.command][1])(
                    **vars(command_known)
                ),
            )
        return status


def execute(argv=None):
    """
    Parse and execute commands.
    Args:
        argv: List of arguments to be passed to Executor.execute()
            if not specified, defaults to sys.argv[1:]

    Returns:
        Exit status.
    """
    argv = argv or sys.argv[1:]
    return Executor().execute(argv)


if __name__ == '__main__':
    sys.exit(execute())
