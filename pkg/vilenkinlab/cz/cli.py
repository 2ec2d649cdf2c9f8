cli_args = {
    'order-tolerance': {
        'help': 'Tolerance of the Cuculescu and decomposition checks',
        'type': float,
        'default': 1e-8,
    },
}
