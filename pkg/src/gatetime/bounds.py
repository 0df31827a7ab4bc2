"""Closed-form gate-time bounds and the variational commutator-ratio lower
bound with its angle-function maximization.

Times are in units of inverse energy (1/g_min when couplings are
normalized to their smallest value).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .graphs import DisconnectedGraphError
from .linalg import DiagonalPhases, require_hermitian, require_unitary

S_EPS = 1e-12
COMMUTATOR_FLOOR = 1e-9  # exclude near-singular denominators from the search


class IndeterminateValue(ValueError):
    """0/0 evaluation that has no direction-independent limit."""


@dataclass(frozen=True)
class BoundReport:
    formula_id: str
    inputs: dict
    value: float

    def __post_init__(self):
        if self.value < 0:
            raise ValueError(f"bound values are nonnegative, got {self.value}")

    def to_doc(self) -> dict:
        return {
            "formula_id": self.formula_id,
            "inputs": dict(self.inputs),
            "value": self.value,
        }


@dataclass
class QubitNetworkSpec:
    """n qubits with two-body coupling magnitudes per edge and (unused by
    the bounds) single-qubit splittings.

    couplings maps (i, j) with i < j to {(pauli_a, pauli_b): magnitude};
    splittings maps i to {pauli: energy}.
    """

    n: int
    couplings: dict[tuple[int, int], dict[tuple[str, str], float]]
    splittings: dict[int, dict[str, float]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"qubit network needs n >= 2, got {self.n}")
        for (i, j), terms in self.couplings.items():
            if not (1 <= i < j <= self.n):
                raise ValueError(f"bad qubit pair ({i},{j}) for n={self.n}")
            for (a, b), g in terms.items():
                if a not in "xyz" or b not in "xyz":
                    raise ValueError(f"bad Pauli labels ({a},{b})")
                if g < 0:
                    raise ValueError("coupling magnitudes must be >= 0")

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(
            (i, j)
            for (i, j), terms in self.couplings.items()
            if any(g > 0 for g in terms.values())
        )

    def g_min(self) -> float:
        values = [
            g for terms in self.couplings.values() for g in terms.values() if g > 0
        ]
        if not values:
            raise ValueError("network has no nonzero couplings")
        return min(values)

    def dist(self, i: int, j: int) -> int:
        """Geodesic distance: fewest edges on a path between qubits i, j."""
        if i == j:
            return 0
        adj: dict[int, list[int]] = {q: [] for q in range(1, self.n + 1)}
        for a, b in self.edge_list():
            adj[a].append(b)
            adj[b].append(a)
        frontier = [i]
        seen = {i}
        steps = 0
        while frontier:
            steps += 1
            nxt = []
            for q in frontier:
                for w in adj[q]:
                    if w == j:
                        return steps
                    if w not in seen:
                        seen.add(w)
                        nxt.append(w)
            frontier = nxt
        raise DisconnectedGraphError(f"qubits {i} and {j} are not connected")


# -- closed forms ------------------------------------------------------------


def upper_bound_edge(d: int, alpha: float, g_min: float) -> float:
    """Worst-case time for a two-level rotation by alpha across a connected
    graph: (|alpha| + pi (d-2)) / g_min."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    if g_min <= 0:
        raise ValueError(f"need g_min > 0, got {g_min}")
    return (abs(alpha) + math.pi * (d - 2)) / g_min


def upper_bound_unitary(d: int, g_min: float) -> float:
    """Worst-case time for an arbitrary U(d) target: pi d^2 (d-1) / (2 g_min)."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    if g_min <= 0:
        raise ValueError(f"need g_min > 0, got {g_min}")
    return math.pi * d**2 * (d - 1) / (2.0 * g_min)


def cnot_bound(spec: QubitNetworkSpec, i: int, j: int) -> float:
    """Worst-case CNOT time between qubits i and j with two local controls
    per qubit: (pi / g_min) (4 dist(i,j) - 3) / 4."""
    if i == j:
        raise ValueError("need two distinct qubits")
    dist = spec.dist(i, j)
    return math.pi * (4 * dist - 3) / (4.0 * spec.g_min())


def unitary_qubit_bound(n: int, g_min: float, n_cnot: int) -> float:
    """Worst-case time for an n-qubit target needing n_cnot CNOT gates:
    pi (4n - 7) / (4 g_min) * n_cnot."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if g_min <= 0:
        raise ValueError(f"need g_min > 0, got {g_min}")
    if n_cnot < 0:
        raise ValueError(f"need n_cnot >= 0, got {n_cnot}")
    return math.pi * (4 * n - 7) / (4.0 * g_min) * n_cnot


def tb_bounds(d: int) -> tuple[float, float]:
    """(lower, upper) for the end-to-end swap on the unit-norm tight-binding
    chain: sqrt(2)(d-1) and (pi/2)(2d-3) sqrt(2(d-1))."""
    if d < 2:
        raise ValueError(f"need d >= 2, got {d}")
    lower = math.sqrt(2.0) * (d - 1)
    upper = (math.pi / 2.0) * (2 * d - 3) * math.sqrt(2.0 * (d - 1))
    return lower, upper


# -- angle function and variational lower bound ------------------------------


def s_function(x) -> float:
    """(1 - cos(sum x)) / (1 - mean(cos x)) for d-1 angle differences x.

    Both sides are evaluated in the cancellation-free half-angle form
    1 - cos(y) = 2 sin^2(y/2). At the 0/0 point (all x zero mod 2 pi) the
    limit along the uniform direction, (d-1)^2, is returned; a vanishing
    denominator with a direction-dependent limit raises IndeterminateValue.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 1:
        raise ValueError("x must be a nonempty 1-d angle array")
    k = len(x)
    den = 2.0 * float(np.mean(np.sin(x / 2.0) ** 2))
    num = 2.0 * float(np.sin(np.sum(x) / 2.0) ** 2)
    if den > S_EPS:
        return num / den
    wrapped = np.array([math.remainder(v, 2 * math.pi) for v in x])
    scale = float(np.max(np.abs(wrapped)))
    if scale == 0.0 or float(np.max(wrapped) - np.min(wrapped)) <= 1e-3 * scale:
        return float(k**2)
    raise IndeterminateValue(
        "denominator vanishes and the angles are not uniform; "
        "the limit depends on the approach direction"
    )


def s_function_maximum(
    d: int, starts: int = 50, seed: int = 0
) -> tuple[float, bool]:
    """Numerical maximum of the angle function for dimension d, with the
    uniform-direction limit (d-1)^2 as a candidate.

    Returns (max value, anomaly): anomaly is set when an interior point
    beats the uniform limit by more than 1e-6, which would contradict the
    claimed analytic maximum and is surfaced rather than clipped.
    """
    k = d - 1
    best = float(k**2)

    def negated(x):
        den = 2.0 * float(np.mean(np.sin(x / 2.0) ** 2))
        if den <= S_EPS:
            return np.inf
        return -2.0 * float(np.sin(np.sum(x) / 2.0) ** 2) / den

    rng = np.random.default_rng(seed)
    interior_best = -np.inf
    for _ in range(starts):
        x0 = rng.uniform(0.0, 2 * math.pi, size=k)
        res = optimize.minimize(negated, x0, method="Nelder-Mead")
        if np.isfinite(res.fun):
            interior_best = max(interior_best, -float(res.fun))
    anomaly = interior_best > best + 1e-6
    return max(best, interior_best), anomaly


def _pair_laplacian(a: np.ndarray) -> np.ndarray:
    """Laplacian L with ||[A, diag(phi)]||^2 = phi^T L phi."""
    w = np.abs(a) ** 2
    s = w + w.T
    np.fill_diagonal(s, 0.0)
    return np.diag(s.sum(axis=1)) - s


def _ray_maximum(u_g: np.ndarray, h0: np.ndarray) -> float:
    """Exact supremum of the commutator ratio over boundary rays V ->
    diag(e^{i eps phi}): for eps -> 0 the ratio tends to
    ||[U_g, diag(phi)]|| / ||[H_0, diag(phi)]||, a ratio of Laplacian
    quadratic forms, so the supremum is a generalized eigenvalue.

    Returns +inf when some phi commutes with the drift but not with the
    target (the ratio is then unbounded).
    """
    lu = _pair_laplacian(u_g)
    lh = _pair_laplacian(h0)
    evals, evecs = np.linalg.eigh(lh)
    tol = max(1e-12, 1e-12 * float(evals[-1]))
    null = evecs[:, evals <= tol]
    pos = evecs[:, evals > tol]
    lam_pos = evals[evals > tol]
    # Non-constant null directions commute with the drift; if the target
    # sees them the bound is unbounded. The constant direction commutes
    # with everything and never contributes.
    if null.shape[1] >= 1:
        on_null = null.T @ lu @ null
        if float(np.max(np.abs(on_null))) > 1e-10:
            return math.inf
    if pos.shape[1] == 0:
        return 0.0
    scaled = pos / np.sqrt(lam_pos)[None, :]
    gen = scaled.T @ lu @ scaled
    top = float(np.linalg.eigvalsh(gen)[-1])
    return math.sqrt(max(0.0, top))


def _interior_objective(u_g: np.ndarray, h0: np.ndarray):
    def neg_ratio(thetas: np.ndarray) -> float:
        v = np.exp(1j * thetas)
        den = np.linalg.norm(h0 * v[None, :] - v[:, None] * h0)
        if den < COMMUTATOR_FLOOR:
            return np.inf
        num = np.linalg.norm(u_g * v[None, :] - v[:, None] * u_g)
        return -num / den

    return neg_ratio


def variational_lower_bound(
    u_g: np.ndarray,
    h0: np.ndarray,
    starts: int = 50,
    seed: int = 0,
) -> float:
    """Largest found value of ||[U_g, V]|| / ||[H_0, V]|| over diagonal
    unitaries V; every evaluated point is a valid minimum-time lower bound,
    so the maximum over the search is one too.

    The supremum over the V -> 1 boundary (where the ratio is 0/0) is
    computed exactly as a generalized eigenvalue of commutator Laplacians;
    interior points are covered by multi-start derivative-free search.
    Returns +inf when some diagonal commutes with the drift but not with
    the target.
    """
    u_g = require_unitary(u_g)
    h0 = require_hermitian(h0)
    d = h0.shape[0]
    if u_g.shape != h0.shape:
        raise ValueError("target and drift dimensions differ")
    if np.max(np.abs(u_g - np.diag(np.diagonal(u_g)))) < 1e-14:
        return 0.0  # diagonal targets commute with every candidate V
    best = _ray_maximum(u_g, h0)
    if math.isinf(best):
        return best

    neg_ratio = _interior_objective(u_g, h0)
    rng = np.random.default_rng(seed)
    for _ in range(starts):
        theta0 = rng.uniform(0.0, 2 * math.pi, size=d)
        value = -neg_ratio(theta0)
        if np.isfinite(value):
            best = max(best, value)
        res = optimize.minimize(
            neg_ratio,
            theta0,
            method="Nelder-Mead",
            options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 200 * d},
        )
        if np.isfinite(res.fun):
            best = max(best, -float(res.fun))
    return best


# -- formula dispatch (CLI surface) ------------------------------------------


def _req(params: dict, names: list[str], formula: str) -> list[float]:
    missing = [n for n in names if n not in params]
    if missing:
        raise ValueError(f"formula {formula} needs parameters {missing}")
    return [params[n] for n in names]


def evaluate_formula(formula_id: str, params: dict) -> BoundReport:
    """Evaluate a closed-form bound by name with named numeric parameters."""
    p = dict(params)
    if formula_id == "edge_upper":
        d, alpha, gm = _req(p, ["d", "alpha", "g_min"], formula_id)
        value = upper_bound_edge(int(d), alpha, gm)
    elif formula_id == "unitary_upper":
        d, gm = _req(p, ["d", "g_min"], formula_id)
        value = upper_bound_unitary(int(d), gm)
    elif formula_id == "cnot_upper":
        dist, gm = _req(p, ["dist", "g_min"], formula_id)
        if dist < 1:
            raise ValueError("cnot_upper needs dist >= 1")
        value = math.pi * (4 * int(dist) - 3) / (4.0 * gm)
    elif formula_id == "qubit_unitary_upper":
        n, gm, n_cnot = _req(p, ["n", "g_min", "n_cnot"], formula_id)
        value = unitary_qubit_bound(int(n), gm, int(n_cnot))
    elif formula_id == "single_edge_g1":
        (d,) = _req(p, ["d"], formula_id)
        value = math.pi * (d - 1.5)
    elif formula_id == "general_g1":
        (d,) = _req(p, ["d"], formula_id)
        value = math.pi / 2.0 * d**2 * (d - 1)
    elif formula_id == "tb_upper":
        (d,) = _req(p, ["d"], formula_id)
        value = tb_bounds(int(d))[1]
    elif formula_id == "tb_lower":
        (d,) = _req(p, ["d"], formula_id)
        value = tb_bounds(int(d))[0]
    else:
        raise ValueError(
            f"unknown formula {formula_id!r}; closed forms are edge_upper, "
            "unitary_upper, cnot_upper, qubit_unitary_upper, single_edge_g1, "
            "general_g1, tb_upper, tb_lower (variational_lower needs --graph "
            "and --target files)"
        )
    return BoundReport(formula_id=formula_id, inputs=p, value=value)


__all__ = [
    "BoundReport",
    "DiagonalPhases",
    "IndeterminateValue",
    "QubitNetworkSpec",
    "cnot_bound",
    "evaluate_formula",
    "s_function",
    "s_function_maximum",
    "tb_bounds",
    "unitary_qubit_bound",
    "upper_bound_edge",
    "upper_bound_unitary",
    "variational_lower_bound",
]
