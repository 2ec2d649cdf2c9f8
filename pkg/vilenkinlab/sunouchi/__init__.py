from vilenkinlab.sunouchi.cli import cli_args
