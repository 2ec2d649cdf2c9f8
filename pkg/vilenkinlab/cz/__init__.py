from vilenkinlab.cz.cli import cli_args
