from vilenkinlab.weak11.cli import cli_args
