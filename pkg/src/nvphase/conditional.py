"""13C-controlled 15N phase gate.

The 13C spin is folded in as an effective field, ``gammaB0 -> gammaB0 +-
A_C / 2``; the 8-dimensional propagation exists to check that this block
picture holds for the full product space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConvergenceError
from .frames import branch_inputs, gate_speed
from .hamiltonian import h_rotating, with_carbon
from .model import RotatingField, SpinConstants, StaticFields, to_angular
from .propagate import PropagationConfig, branch_phases, evolve, gate_step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ConditionalReport:
    """Phase-shift rates (rad/us) for the two 13C states and their difference."""

    shift_plus: float
    shift_minus: float
    relative: float
    series_terms: tuple[float, ...] = ()
    kmax: int = 0
    exact_difference: float = math.nan
    truncation_error: float = 0.0
    method: str = "series"
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def gate_time(self) -> float:
        """Conditional pi time in us (``inf`` if the shifts coincide)."""
        return math.inf if self.relative == 0 else math.pi / abs(self.relative)


def _carbon_fields(c: SpinConstants, s: StaticFields) -> tuple[StaticFields, StaticFields]:
    half = 0.5 * c.A_par_C
    return replace(s, gammaB0=s.gammaB0 + half), replace(s, gammaB0=s.gammaB0 - half)


def conditional_shift(c: SpinConstants, s: StaticFields, omega_prime: float = 1000.0,
                      kmax: int = 10) -> ConditionalReport:
    """Series for ``dOmega(C=+) - dOmega(C=-)`` truncated at ``kmax`` terms."""
    x = c.A_par_C / (2.0 * s.gammaB0)
    if abs(x) >= 1.0:
        raise ConvergenceError(f"series diverges: A_C / 2 gammaB0 = {x:.3g}")
    for sign in (1.0, -1.0):
        ratio = abs(c.A_par_N / (2.0 * s.gammaB0 + sign * c.A_par_C))
        if ratio > 0.2:
            log.warning("A_N / (2 gammaB0 +- A_C) = %.3g is not small", ratio)
    plus, minus = (gate_speed(c, f, omega_prime).geometric_part for f in _carbon_fields(c, s))
    a = to_angular(c.A_par_N)
    e = to_angular(s.dE0)
    b = to_angular(s.gammaB0)
    pref = -to_angular(omega_prime) * a * e * e / (2.0 * b ** 3)

    def term(k):
        return pref * 2 * k * (2 * k + 1) * x ** (2 * k - 1)

    terms = tuple(term(k) for k in range(1, kmax + 1))
    return ConditionalReport(
        shift_plus=plus, shift_minus=minus, relative=float(sum(terms)), series_terms=terms,
        kmax=kmax, exact_difference=plus - minus, truncation_error=abs(term(kmax + 1)))


def carbon_inputs(c: SpinConstants, s: StaticFields) -> np.ndarray:
    """8x4 input columns ordered (N up, C up), (N down, C up), (N up, C down), (N down, C down)."""
    cols = []
    for fields, cvec in zip(_carbon_fields(c, s), (np.array([1.0, 0.0]), np.array([0.0, 1.0]))):
        four = branch_inputs(c, fields)
        cols.extend(np.kron(four[:, k], cvec) for k in range(2))
    return np.stack(cols, axis=1).astype(complex)


def conditional_states(c: SpinConstants, s: StaticFields, r: RotatingField,
                       cfg: PropagationConfig | None = None) -> np.ndarray:
    """Checkpoint states of the 8-dim gate, one checkpoint per slow period."""
    cfg = cfg or PropagationConfig()
    if cfg.step is None:
        cfg = replace(cfg, step=gate_step(r))
    times = r.period * np.arange(r.n_cycles + 1)
    return evolve(lambda t: with_carbon(h_rotating(c, r, t), c), carbon_inputs(c, s), times, cfg)


def conditional_numeric(c: SpinConstants, s: StaticFields, r: RotatingField,
                        cfg: PropagationConfig | None = None) -> ConditionalReport:
    """Brute-force relative shift from the 8-dim propagation."""
    states = conditional_states(c, s, r, cfg)
    omegas, cyc = branch_phases(states)
    T = r.period * r.n_cycles
    a = to_angular(c.A_par_N)
    plus = (omegas[0] - omegas[1]) / T - a
    minus = (omegas[2] - omegas[3]) / T - a
    rel = float(plus - minus)
    return ConditionalReport(
        shift_plus=float(plus), shift_minus=float(minus), relative=rel,
        exact_difference=rel, method="numeric",
        extra={"cyclicity": tuple(float(v) for v in cyc), "duration": T})
