from vilenkinlab.algebra.martingale import CERTIFICATE_TOLERANCE, weak11_certificate
from vilenkinlab.algebra.vilenkin import KernelBank
from vilenkinlab.base import BaseSuite
from vilenkinlab.utils.common import write_json


class WeakType(BaseSuite):
    """
    Weak type (1, 1) certificates of the maximal operator sup_n sigma~_n for
    random positive fields over a lambda grid.
    """

    name = 'weak11'
    claims = ('weak11-sup', 'weak11-tail')

    def __init__(self, certificate_tolerance=CERTIFICATE_TOLERANCE, witnesses=False, **kwargs):
        """
        Initialize certificate settings.
        Args:
            certificate_tolerance: Relative tolerance of the compressed bounds.
            witnesses: If True, every certificate is written with its projections.
            **kwargs: kwargs passed to vilenkinlab.base.BaseSuite
        """
        super(WeakType, self).__init__(**kwargs)
        self.certificate_tolerance = certificate_tolerance
        self.witnesses = witnesses
        self.banks = {}

    def bank(self, radix):
        if radix not in self.banks:
            self.banks[radix] = KernelBank(self.system, radix)
        return self.banks[radix]

    def save_witness(self, certificate, claim, trial_key, index):
        folder = self.out / f'{self.id}-witnesses'
        folder.mkdir(parents=True, exist_ok=True)
        write_json(
            certificate.to_json(projections=True),
            folder / f'{claim}-{certificate.depth}-{trial_key}-{index}.json',
        )

    def run_trial(self, claim, radix, rng):
        f = self.random_field(radix, rng, positive=True)
        size, rows = f.norm(1), []
        trial_key = int(rng.integers(2**31))
        for index, level in enumerate(self.lambda_grid(f)):
            certificate = weak11_certificate(
                f, level, self.bank(radix), self.certificate_tolerance
            )
            verified = certificate.verify()
            if self.witnesses:
                self.save_witness(certificate, claim, trial_key, index)
            row = {
                'lambda': level,
                'tail': certificate.tail,
                'fitted_c_bd': certificate.fitted_c_bd,
                'fitted_c_boff': certificate.fitted_c_boff,
                'verified': verified.passed,
            }
            if claim == 'weak11-sup':
                row.update(lhs=certificate.sup_bound, rhs=level)
            else:
                row.update(lhs=level * certificate.tail, rhs=size)
            if not verified.passed:
                row.update(status='FAIL', failure=str(verified.failure))
            rows.append(row)
        return rows
