from vilenkinlab import bau, cuculescu, cz, kernels, sunouchi, transference, validate, weak11
from vilenkinlab.algebra.vilenkin import AdicCharacters, VilenkinCharacters
from vilenkinlab.bau.suite import ConvergenceProbe
from vilenkinlab.cuculescu.suite import CuculescuProjections
from vilenkinlab.cz.suite import CalderonZygmund
from vilenkinlab.kernels.suite import KernelEstimates
from vilenkinlab.sunouchi.suite import SunouchiSquare
from vilenkinlab.transference.suite import Transference
from vilenkinlab.utils.cli import run_args, show_args
from vilenkinlab.utils.common import register_configs
from vilenkinlab.validate.suite import ValidateSystem
from vilenkinlab.weak11.suite import WeakType

__license__ = 'MIT'
__version__ = 1.0

systems = {
    'vilenkin-characters': VilenkinCharacters,
    'm-adic': AdicCharacters,
}
suites = {
    'validate-system': {'module': validate, 'suite': ValidateSystem},
    'kernels': {'module': kernels, 'suite': KernelEstimates},
    'cuculescu': {'module': cuculescu, 'suite': CuculescuProjections},
    'cz': {'module': cz, 'suite': CalderonZygmund},
    'weak11': {'module': weak11, 'suite': WeakType},
    'transference': {'module': transference, 'suite': Transference},
    'sunouchi': {'module': sunouchi, 'suite': SunouchiSquare},
    'bau-probe': {'module': bau, 'suite': ConvergenceProbe},
}
register_configs(suites)
commands = {
    'run': (run_args, 'run', 'Check every claim of a suite and write reports'),
    'show': (show_args, 'show', 'Display stored reports of a suite'),
}
