config_args = {
    'config': {'help': 'Path to .cfg file with a [run] section overriding suite defaults'},
    'radix': {
        'help': 'Comma separated radix digits, cycled or truncated to --depth',
        'cfg_type': 'digits',
    },
    'depth': {
        'help': 'Depth N, constants are also fitted at N + 1',
        'type': int,
        'cfg_type': 'int',
    },
    'fiber-dim': {'help': 'Fiber matrix dimension d', 'type': int, 'cfg_type': 'int'},
    'system': {
        'help': 'Character system, one of vilenkinlab.systems',
        'cfg_type': 'str',
    },
    'lambda-count': {
        'help': 'Number of lambda levels per random input',
        'type': int,
        'cfg_type': 'int',
    },
    'lambda-range': {
        'help': 'Lambda levels span ||E_0 f|| * 10^[0, range]',
        'type': float,
        'cfg_type': 'float',
    },
    'lacunary': {
        'help': 'Lacunary indices as a comma list, or `default` for n_k = M_(k-1)',
        'cfg_type': 'str',
    },
    'trials': {'help': 'Random inputs per claim and depth', 'type': int, 'cfg_type': 'int'},
    'seed': {'help': 'Master seed', 'type': int, 'cfg_type': 'int'},
    'out': {'help': 'Report directory', 'cfg_type': 'str'},
    'budget': {
        'help': 'Maximum M_(N+1) * fiber_dim accepted before refusing to run',
        'type': int,
        'cfg_type': 'int',
    },
    'n-jobs': {
        'help': 'Worker processes, trials run in parallel when > 1',
        'type': int,
        'cfg_type': 'int',
    },
    'quiet': {
        'help': 'If specified, no progress messages will be displayed',
        'action': 'store_true',
        'cfg_type': 'bool',
    },
}

run_args = {
    'fail-fast': {
        'help': 'If specified, stop after the first claim with a FAIL row',
        'action': 'store_true',
    },
}

show_args = {
    'max-rows': {
        'help': 'Maximum rows displayed per report',
        'type': int,
        'default': 20,
    },
}
