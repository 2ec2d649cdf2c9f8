cli_args = {
    'epsilons': {
        'help': 'Trace budgets of the probe projections',
        'type': float,
        'nargs': '+',
        'default': [0.5, 0.25, 0.125, 0.001],
    },
}
