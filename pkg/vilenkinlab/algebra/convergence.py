from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from vilenkinlab.algebra.factor import nc_cesaro, nc_partial_sum
from vilenkinlab.algebra.field import (
    LAMBDA_SPAN,
    OperatorField,
    cesaro,
    lambda_candidates,
    lambda_certificate,
    partial_sum,
    projection_trace,
)
from vilenkinlab.algebra.matrix import TOLERANCE, as_matrix, operator_norm

PROBE_EPSILONS = (0.5, 0.25, 0.125, 1e-3)
WITNESS_LEVELS = 32
TERMINAL_TOLERANCE = 1e-9


@dataclass
class DecayTable:
    """
    sup_{n >= n_0} ||e (sigma_n x - x) e|| and sup_{n >= n_0} ||e (S_n x - x) e||
    per (epsilon, n_0), with phi(1 - e) < epsilon.
    """

    rows: list = field(default_factory=list)
    size: int = 0

    def frame(self):
        return pd.DataFrame(self.rows)

    def is_monotone(self, column='cesaro_tail'):
        for epsilon in {row['epsilon'] for row in self.rows}:
            values = [row[column] for row in self.rows if row['epsilon'] == epsilon]
            if any(later > earlier for earlier, later in zip(values, values[1:])):
                return False
        return True

    def terminal(self, column='partial_tail'):
        """
        Largest entry at n_0 = M over every epsilon.
        """
        return max(
            (row[column] for row in self.rows if row['n_0'] == self.size), default=0.0
        )


def residual_sequences(x, context=None, system=None):
    """
    sigma_n x - x and S_n x - x for 1 <= n <= M, each of shape (M, P, d, d)
    with P = 1 on the factor side.
    """
    if isinstance(x, OperatorField):
        assert system is not None, 'Field probes require a system'
        size = x.radix.size
        means = [cesaro(x, n, system).values - x.values for n in range(1, size + 1)]
        sums = [partial_sum(x, n, system).values - x.values for n in range(1, size + 1)]
    else:
        assert context is not None, 'Factor probes require a FactorContext'
        x = context.check_operator(x)
        size = context.size
        means = [as_matrix(nc_cesaro(x, n, context)) - x for n in range(1, size + 1)]
        sums = [as_matrix(nc_partial_sum(x, n, context)) - x for n in range(1, size + 1)]
        means, sums = [item[None] for item in means], [item[None] for item in sums]
    return np.stack(means), np.stack(sums), size


def probe_projection(residuals, epsilon, levels=WITNESS_LEVELS):
    """
    Two-sided Lambda witness of the residual sequence: over log spaced levels
    t up to max_n ||r_n||, the first t with a candidate e satisfying
    ||e r_n e|| <= t for every n and phi(1 - e) < epsilon. At the top level
    e = 1 qualifies.
    Args:
        residuals: Array of shape (M, P, d, d)
        epsilon: Trace budget in (0, 1]
        levels: Grid size.

    Returns:
        Array of projections of shape (P, d, d)
    """
    identity = np.broadcast_to(np.eye(residuals.shape[-1]), residuals.shape[1:])
    t_max = float(np.max(operator_norm(residuals), initial=0.0))
    if t_max <= TOLERANCE:
        return identity.copy()
    for t in t_max * np.geomspace(LAMBDA_SPAN, 1, levels):
        witnesses = [
            candidate
            for candidate in lambda_candidates(residuals, t, 'two-sided')
            if lambda_certificate(residuals, candidate, t, 1).passed
            and 1 - projection_trace(candidate) < epsilon
        ]
        if witnesses:
            return max(witnesses, key=projection_trace)
    return identity.copy()


def tail_sup(residuals, e):
    norms = operator_norm(e @ residuals @ e).reshape(len(residuals), -1).max(axis=1)
    return np.maximum.accumulate(norms[::-1])[::-1]


def bau_probe(x, epsilons=PROBE_EPSILONS, starts=None, context=None, system=None):
    """
    Bilateral almost uniform convergence probe of the Cesaro means of x.
    Args:
        x: Operator of a FactorContext or OperatorField.
        epsilons: Trace budgets, phi(1 - e) < epsilon for each.
        starts: Tail starts n_0 in [1, M], defaults to all.
        context: FactorContext for factor inputs.
        system: VilenkinLikeSystem for field inputs.

    Returns:
        DecayTable
    """
    means, sums, size = residual_sequences(x, context, system)
    starts = list(starts or range(1, size + 1))
    assert all(1 <= n_0 <= size for n_0 in starts), f'Tail starts outside [1, {size}]'
    table = DecayTable(size=size)
    for epsilon in epsilons:
        assert 0 < epsilon <= 1, f'Expected epsilon in (0, 1], got {epsilon}'
        e = probe_projection(means, epsilon)
        tail = max(0.0, 1 - projection_trace(e))
        cesaro_tails, partial_tails = tail_sup(means, e), tail_sup(sums, e)
        for n_0 in sorted(starts):
            table.rows.append(
                {
                    'epsilon': epsilon,
                    'n_0': n_0,
                    'trace_tail': tail,
                    'cesaro_tail': float(cesaro_tails[n_0 - 1]),
                    'partial_tail': float(partial_tails[n_0 - 1]),
                }
            )
    return table


def cesaro_deficits(x, context):
    """
    ||sigma_n^R(x) - x||_inf for 1 <= n <= M_{2N}.
    """
    means, _, _ = residual_sequences(x, context)
    return operator_norm(means[:, 0])
