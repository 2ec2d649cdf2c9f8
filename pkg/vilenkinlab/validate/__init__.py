from vilenkinlab.validate.cli import cli_args
