from vilenkinlab.cuculescu.cli import cli_args
