cli_args = {
    'tolerance': {
        'help': 'Residual tolerance of the generating function checks',
        'type': float,
        'default': 1e-10,
    },
}
