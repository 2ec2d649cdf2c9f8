from dataclasses import dataclass, field

import numpy as np
import pandas as pd

DEGENERATE_RHS = 1e-14


def fit_constant(pairs):
    """
    Smallest c with lhs <= c * rhs over all non-degenerate pairs.
    Args:
        pairs: Iterable of (lhs, rhs), pairs with rhs <= 1e-14 are degenerate.

    Returns:
        (c_hat, index of the first pair attaining it) or (0.0, None)
        if every pair is degenerate.
    """
    c_hat, index = 0.0, None
    for i, (lhs, rhs) in enumerate(pairs):
        if rhs <= DEGENERATE_RHS:
            continue
        ratio = lhs / rhs
        if index is None or ratio > c_hat:
            c_hat, index = ratio, i
    return float(c_hat), index


@dataclass
class BoundReport:
    """
    A verified inequality lhs <= c * rhs over a parameter sweep.
    """

    claim: str
    lhs: float
    rhs: float
    fitted_c: float
    status: str = 'PASS'
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status != 'FAIL'

    @classmethod
    def from_rows(cls, claim, rows, **metadata):
        """
        Fit the constant over sweep rows, each a dict with `lhs` and `rhs`.
        A row with rhs 0 but lhs > 0 fails the claim outright.
        Args:
            claim: Claim id.
            rows: List of dicts having at least `lhs` and `rhs`.
            **metadata: Extra fields recorded with the report.

        Returns:
            BoundReport
        """
        pairs = [(row['lhs'], row['rhs']) for row in rows]
        c_hat, index = fit_constant(pairs)
        status = 'PASS' if index is not None else 'DEGENERATE'
        violated = any(
            rhs <= DEGENERATE_RHS and lhs > DEGENERATE_RHS for lhs, rhs in pairs
        )
        if violated or not np.isfinite(np.array(pairs, dtype=float)).all():
            status = 'FAIL'
        lhs, rhs = pairs[index] if index is not None else (0.0, 0.0)
        return cls(claim, float(lhs), float(rhs), c_hat, status, rows, metadata)

    def frame(self):
        """
        Sweep rows as a DataFrame with the fitted constant and metadata columns.

        Returns:
            pandas.DataFrame
        """
        frame = pd.DataFrame(self.rows)
        frame.insert(0, 'claim', self.claim)
        frame['fitted_c'] = self.fitted_c
        for key, value in self.metadata.items():
            frame[key] = value if np.isscalar(value) else str(value)
        return frame

    def summary(self):
        return {
            'claim': self.claim,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'fitted_c': self.fitted_c,
            'status': self.status,
            'count': len(self.rows),
        }
