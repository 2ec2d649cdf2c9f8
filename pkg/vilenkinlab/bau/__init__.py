from vilenkinlab.bau.cli import cli_args
