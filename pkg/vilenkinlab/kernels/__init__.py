from vilenkinlab.kernels.cli import cli_args
