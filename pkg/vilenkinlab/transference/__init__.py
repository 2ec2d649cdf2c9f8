from vilenkinlab.transference.cli import cli_args
