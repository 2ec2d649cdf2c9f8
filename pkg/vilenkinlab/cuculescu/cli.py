cli_args = {
    'order-tolerance': {
        'help': 'Tolerance of the commutation, compression and order checks',
        'type': float,
        'default': 1e-8,
    },
}
