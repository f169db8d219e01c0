"""First critical field and a model of the vortex-line energy competition.

With ``L = log(1/eps)`` and ``LL = log L`` the excess energy of ``N``
copies of the maximizing curve at applied field ``h`` is modelled as::

    E(N) = N pi |G0| (L - c_log LL) - 2 pi h N <B0, G0> + c_rep N^2 LL

The per-line cost and the repulsion constant are not known quantitatively,
so ``c_log`` and ``c_rep`` are free parameters; conclusions drawn from the
model (threshold location up to O(1), boundedness of the line count) do
not depend on their values.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidEpsilon


def _check_eps(epsilon: float, need_loglog: bool = False):
    if not 0 < epsilon < 1:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {epsilon}")
    if need_loglog and not epsilon < math.exp(-1):
        raise InvalidEpsilon(f"log log(1/epsilon) needs epsilon < 1/e, got {epsilon}")


def hc1_zero(epsilon: float, R0: float) -> float:
    """Leading-order first critical field ``|log eps| / (2 R0)``."""
    _check_eps(epsilon)
    if not R0 > 0:
        raise ValueError("R0 must be positive")
    return abs(math.log(epsilon)) / (2 * R0)


@dataclass(frozen=True)
class EnergyModel:
    epsilon: float
    h_ex: float
    J0: float
    R0: float
    len_gamma0: float
    flux_gamma0: float | None = None
    c_log: float = 1.0
    c_rep: float = 1.0

    def __post_init__(self):
        _check_eps(self.epsilon)
        if not self.R0 > 0:
            raise ValueError("R0 must be positive")
        if self.h_ex < 0:
            raise ValueError("h_ex must be nonnegative")
        flux = self.R0 * self.len_gamma0
        if self.flux_gamma0 is None:
            object.__setattr__(self, "flux_gamma0", flux)
        elif abs(self.flux_gamma0 - flux) > 1e-10 * abs(flux):
            raise ValueError("flux_gamma0 must equal R0 * len_gamma0")

    @property
    def log_eps(self) -> float:
        """``log(1/eps)``."""
        return -math.log(self.epsilon)

    @property
    def loglog(self) -> float:
        _check_eps(self.epsilon, need_loglog=True)
        return math.log(self.log_eps)

    @property
    def hc1_zero(self) -> float:
        return hc1_zero(self.epsilon, self.R0)

    def with_field(self, h_ex: float) -> "EnergyModel":
        return replace(self, h_ex=h_ex)

    def line_cost(self) -> float:
        """Cost of one copy of the maximizer before the field gain."""
        ll = self.loglog if self.c_log else 0.0
        return math.pi * self.len_gamma0 * (self.log_eps - self.c_log * ll)

    def energy(self, N):
        """``E(N)``; vectorized over ``N``."""
        N = np.asarray(N, dtype=float)
        lin = self.line_cost() - 2 * math.pi * self.h_ex * self.flux_gamma0
        rep = self.c_rep * self.loglog if self.c_rep else 0.0
        return lin * N + rep * N**2


def line_excess_energy(model: EnergyModel, curves) -> float:
    """Sum over curves of ``pi |G| (L - c_log LL) - 2 pi h <B0, G>`` (no repulsion)."""
    if not curves:
        return 0.0
    ll = model.loglog if model.c_log else 0.0
    per_len = math.pi * (model.log_eps - model.c_log * ll)
    return float(sum(per_len * c.len - 2 * math.pi * model.h_ex * c.flux for c in curves))


def optimal_line_count(model: EnergyModel, N_max: int):
    """Minimizer of ``E(N)`` over ``N = 0..N_max``; smallest ``N`` wins ties.

    Returns ``(N_star, energies)`` with ``energies[N] = E(N)``.
    """
    if N_max < 1:
        raise ValueError("N_max must be at least 1")
    E = model.energy(np.arange(N_max + 1))
    return int(np.argmin(E)), E.tolist()


def vertex_line_count(model: EnergyModel, N_max: int) -> int:
    """Closed-form minimizer: round the vertex of the quadratic to the better neighbour."""
    lin = model.line_cost() - 2 * math.pi * model.h_ex * model.flux_gamma0
    a = model.c_rep * model.loglog if model.c_rep else 0.0
    if a <= 0:
        return 0 if lin >= 0 else N_max
    v = min(max(-lin / (2 * a), 0.0), float(N_max))
    lo, hi = int(math.floor(v)), int(math.ceil(v))
    e_lo, e_hi = model.energy(lo), model.energy(hi)
    return lo if e_lo <= e_hi else hi


def hc1_band(model: EnergyModel, K0: float, K: float):
    """``((H - K0, H + K0), H + K LL)`` with ``H`` the leading-order field."""
    H = model.hc1_zero
    return (H - K0, H + K0), H + K * model.loglog


def vortexless_threshold(model: EnergyModel, eps_list) -> float:
    """Smallest ``K0 >= 0`` such that ``h <= H - K0`` gives ``N_star = 0`` for every listed eps.

    At ``h = H - K0`` the linear coefficient of ``E`` is
    ``2 pi flux K0 - pi |G0| c_log LL``; ``N_star = 0`` exactly when adding
    the repulsion of the first line keeps ``E(1) >= 0``.
    """
    k0 = 0.0
    for eps in eps_list:
        m = replace(model, epsilon=eps)
        ll = m.loglog
        need = (math.pi * m.len_gamma0 * m.c_log - m.c_rep) * ll / (2 * math.pi * m.flux_gamma0)
        k0 = max(k0, need)
    return k0


PHASE_HEADER = ["epsilon", "h_ex", "h_minus_hc10", "N_star", "E_Nstar"]


def phase_table(eps_list, h_multipliers, R0: float, len_gamma0: float, J0: float = 0.0,
                c_log: float = 1.0, c_rep: float = 1.0, N_max: int = 64) -> list:
    """Rows ``(eps, h, h - H, N_star, E(N_star))`` for ``h = H(eps) + k LL(eps)``.

    Rows are ordered by epsilon, then multiplier, as given.
    """
    rows = []
    for eps in eps_list:
        base = EnergyModel(eps, 0.0, J0, R0, len_gamma0, c_log=c_log, c_rep=c_rep)
        H, ll = base.hc1_zero, base.loglog
        for k in h_multipliers:
            h = H + k * ll
            m = base.with_field(max(h, 0.0))
            n, E = optimal_line_count(m, N_max)
            rows.append((float(eps), float(m.h_ex), float(m.h_ex - H), n, float(E[n])))
    return rows


def write_phase_csv(path, rows, comment: str | None = None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(PHASE_HEADER)
        for eps, h, dh, n, e in rows:
            w.writerow([repr(eps), repr(h), repr(dh), n, repr(e)])


MODEL_KEYS = ("epsilon", "h_ex", "c_log", "c_rep", "N_max")


def parse_key_values(text: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment, blank lines are ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        if not k:
            raise ValueError(f"line {lineno}: empty key")
        out[k] = v
    return out


def read_model_config(path) -> dict:
    """Model settings from a key=value file, numbers converted."""
    with open(path) as fh:
        raw = parse_key_values(fh.read())
    unknown = set(raw) - set(MODEL_KEYS)
    if unknown:
        raise ValueError(f"unknown model keys: {sorted(unknown)}")
    out = {k: float(v) for k, v in raw.items()}
    if "N_max" in out:
        out["N_max"] = int(out["N_max"])
    return out
