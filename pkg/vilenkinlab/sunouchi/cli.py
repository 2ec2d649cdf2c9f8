cli_args = {
    'exponents': {
        'help': 'Exponents p in [1, 2] of the Sunouchi ratios',
        'type': float,
        'nargs': '+',
        'default': [1.0, 1.5, 2.0],
    },
    'reference-depth': {
        'help': 'Largest depth of the multiplier supremum sweep',
        'type': int,
        'default': 12,
    },
}
