cli_args = {
    'certificate-tolerance': {
        'help': 'Relative tolerance of the compressed maximal bounds',
        'type': float,
        'default': 1e-7,
    },
    'witnesses': {
        'help': 'If specified, certificates are written with their projections '
        'to <out>/weak11-witnesses/',
        'action': 'store_true',
    },
}
