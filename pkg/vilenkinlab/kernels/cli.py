cli_args = {
    'estimates': {
        'help': 'Kernel estimates to sweep, defaults to all',
        'nargs': '+',
    },
    'lkl-samples': {
        'help': 'Number of indices l checked against the block decomposition of l K_l',
        'type': int,
        'default': 32,
    },
}
