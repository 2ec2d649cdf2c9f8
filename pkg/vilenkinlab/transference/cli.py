cli_args = {
    'sequence-length': {
        'help': 'Length of the sequences whose Lambda certificates are transferred',
        'type': int,
        'default': 3,
    },
}
