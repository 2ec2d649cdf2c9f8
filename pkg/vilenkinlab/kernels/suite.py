import numpy as np

from vilenkinlab.algebra.vilenkin import (
    KERNEL_TOLERANCE,
    KernelBank,
    kernel_estimates,
    validate_system,
    verify_kernel_bound,
    verify_lkl,
)
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import identity_row


class KernelEstimates(BaseSuite):
    """
    Exhaustive sweeps of the Dirichlet, Fejer, block and sup kernel estimates
    with unit constant right sides, plus the block decomposition of l K_l.
    """

    name = 'kernels'
    claims = (*kernel_estimates, 'lkl-identity')
    deterministic = claims

    def __init__(self, estimates=None, lkl_samples=32, **kwargs):
        """
        Initialize kernel sweep settings.
        Args:
            estimates: Kernel estimates to sweep, defaults to all of
                vilenkinlab.algebra.vilenkin.kernel_estimates
            lkl_samples: Number of indices l checked for the l K_l identity.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(KernelEstimates, self).__init__(**kwargs)
        if estimates:
            unknown = set(estimates) - set(kernel_estimates)
            assert not unknown, f'Unknown kernel estimates {sorted(unknown)}'
            selected = [name for name in kernel_estimates if name in estimates]
            self.claims = (*selected, 'lkl-identity')
        assert lkl_samples >= 1, f'Expected lkl_samples >= 1, got {lkl_samples}'
        self.lkl_samples = lkl_samples
        self.banks = {}

    def bank(self, radix):
        if radix not in self.banks:
            self.banks[radix] = KernelBank(self.system, radix)
        return self.banks[radix]

    def lkl_indices(self, radix):
        """
        Evenly spaced l in [1, M_N), all of them when few enough.
        """
        count = min(self.lkl_samples, radix.size - 1)
        return sorted({int(l) for l in np.linspace(1, radix.size - 1, count)})

    def run_trial(self, claim, radix, rng):
        bank = self.bank(radix)
        if claim == 'lkl-identity':
            return [
                identity_row(verify_lkl(bank, l), KERNEL_TOLERANCE, l=l)
                for l in self.lkl_indices(radix)
            ]
        delta = validate_system(self.system, radix).delta_max
        return verify_kernel_bound(claim, bank, delta).rows
