"""Exact solving and policy analysis for dynamic zero-sum games.

Covers policy-pair evaluation by linear solve, Shapley value iteration
(per-state matrix games on the one-step lookahead), best responses to a
fixed opponent, the alternating "naive" policy-iteration scheme, and the
exact sandwich interval that best responses put around the game value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matrix_games
from .games import (
    PLAYER_A,
    PLAYER_B,
    Discounted,
    FiniteHorizon,
    GameModel,
    MdpView,
    MixedPolicy,
    Ssp,
    check_policy,
    fix_player,
    make_policy,
    pure_policy,
    regime_alpha,
    stack_view,
)

PROPERNESS_EPS = 1e-10
STALL_WINDOW = 200


class ImproperPair(RuntimeError):
    """The induced chain of a policy pair does not reach the absorbing state."""


class NoConvergence(RuntimeError):
    def __init__(self, msg: str, last_delta: float):
        super().__init__(msg)
        self.last_delta = last_delta


class UnboundedValue(RuntimeError):
    """Value iteration diverged: the fixed opponent policy is improper."""


# ---------------------------------------------------------------------------
# Policy-pair evaluation


def induced_chain(
    model: GameModel, mu: MixedPolicy, nu: MixedPolicy
) -> tuple[np.ndarray, np.ndarray]:
    """Transition matrix and expected stage-cost vector of a policy pair."""
    n = model.n_states
    P = np.zeros((n, n))
    G = np.zeros(n)
    for i in range(n):
        y, z = mu[i], nu[i]
        P[i] = np.einsum("u,v,uvj->j", y, z, model.transition[i])
        g_bar = np.einsum("uvj,uvj->uv", model.transition[i], model.cost[i])
        G[i] = y @ g_bar @ z
    return P, G


def evaluate_policy_pair(
    model: GameModel, mu: MixedPolicy, nu: MixedPolicy
) -> np.ndarray:
    """Exact cost-to-go of the pair (mu, nu) at every state."""
    check_policy(model, mu, PLAYER_A)
    check_policy(model, nu, PLAYER_B)
    if isinstance(model.regime, FiniteHorizon):
        raise ValueError("embed a finite-horizon game before evaluating policies")
    P, G = induced_chain(model, mu, nu)
    n = model.n_states
    if isinstance(model.regime, Discounted):
        J = np.linalg.solve(np.eye(n) - model.regime.alpha * P, G)
    else:
        a = model.regime.absorbing
        keep = np.array([i for i in range(n) if i != a], dtype=int)
        P_sub = P[np.ix_(keep, keep)]
        if _spectral_radius(P_sub) >= 1.0 - PROPERNESS_EPS:
            raise ImproperPair(
                "induced chain does not reach the absorbing state from every state"
            )
        try:
            J_sub = np.linalg.solve(np.eye(len(keep)) - P_sub, G[keep])
        except np.linalg.LinAlgError as exc:
            raise ImproperPair(f"singular evaluation system: {exc}") from exc
        J = np.zeros(n)
        J[keep] = J_sub
    J.setflags(write=False)
    return J


def _spectral_radius(P: np.ndarray, max_iter: int = 2000) -> float:
    """Power-iteration estimate of the spectral radius of a nonnegative matrix."""
    if P.size == 0:
        return 0.0
    v = np.ones(P.shape[0])
    lam = 0.0
    for _ in range(max_iter):
        w = P @ v
        s = float(w.max())
        if s <= 0.0:
            return 0.0
        w /= s
        # Growth factor alone can repeat before the iteration settles
        # (e.g. nilpotent chains); require the vector to converge too.
        if abs(s - lam) < 1e-14 and float(np.abs(w - v).max()) < 1e-13:
            return s
        lam, v = s, w
    return lam


# ---------------------------------------------------------------------------
# Shapley value iteration


def stage_game_matrix(model: GameModel, i: int, values: np.ndarray) -> np.ndarray:
    """One-step lookahead matrix at state i: expected cost plus continuation."""
    alpha = regime_alpha(model.regime)
    g_bar = np.einsum("uvj,uvj->uv", model.transition[i], model.cost[i])
    return g_bar + alpha * np.einsum("uvj,j->uv", model.transition[i], values)


def shapley_backup(
    model: GameModel, values: np.ndarray
) -> tuple[np.ndarray, MixedPolicy, MixedPolicy]:
    """One sweep: solve the stage matrix game at every state."""
    n = model.n_states
    absorbing = model.absorbing
    new = np.zeros(n)
    mu_vecs: list[np.ndarray] = []
    nu_vecs: list[np.ndarray] = []
    for i in range(n):
        if i == absorbing:
            mu_vecs.append(np.ones(model.actions_a[i]) / model.actions_a[i])
            nu_vecs.append(np.ones(model.actions_b[i]) / model.actions_b[i])
            continue
        sol = matrix_games.solve(stage_game_matrix(model, i, values))
        new[i] = sol.value
        mu_vecs.append(sol.row_strategy)
        nu_vecs.append(sol.col_strategy)
    return new, make_policy(mu_vecs), make_policy(nu_vecs)


def shapley_value_iteration(
    model: GameModel, tol: float = 1e-10, max_iter: int = 100_000
) -> tuple[np.ndarray, MixedPolicy, MixedPolicy]:
    """Iterate the Shapley operator to the equilibrium value function.

    Returns the value function together with the per-state equilibrium
    strategies of the final stage matrix games. Time-embedded games reach
    an exact fixed point after one sweep per period.
    """
    if isinstance(model.regime, FiniteHorizon):
        raise ValueError("embed a finite-horizon game before solving")
    if tol < 0.0 or (tol == 0.0 and not isinstance(model.regime, Ssp)):
        raise ValueError("tol must be positive")
    J = np.zeros(model.n_states)
    history: list[float] = []
    for _ in range(max_iter):
        J_new, mu, nu = shapley_backup(model, J)
        delta = float(np.abs(J_new - J).max())
        J = J_new
        if delta <= tol:
            J.setflags(write=False)
            return J, mu, nu
        history.append(delta)
        if _stalled(history, delta, tol, np.abs(J).max()):
            raise NoConvergence(
                f"value iteration stalled at delta {delta:.3e}", delta
            )
    raise NoConvergence(
        f"no convergence within {max_iter} sweeps (last delta {delta:.3e})", delta
    )


def _stalled(history: list[float], delta: float, tol: float, scale: float) -> bool:
    # Linear value growth keeps the sweep-to-sweep delta pinned at a constant;
    # a contraction shrinks it measurably over the window.
    if len(history) <= STALL_WINDOW or delta <= max(tol, 1e-9 * max(1.0, scale)):
        return False
    return abs(delta - history[-1 - STALL_WINDOW]) <= 1e-12 * max(1.0, delta)


# ---------------------------------------------------------------------------
# Best responses


def solve_view(
    view: MdpView,
    tol: float = 1e-10,
    max_sweeps: int = 100_000,
    value_cap: float = 1e8,
) -> tuple[np.ndarray, np.ndarray]:
    """Optimal value and pure action per state of a one-player view.

    Time-embedded views are solved by exact backward induction, infinite
    horizon views by value iteration. ``tol == 0`` demands an exact
    floating-point fixed point (needed by zero-variance duality checks).
    Ties are broken toward the lowest action index.
    """
    opt = np.max if view.orientation == "max" else np.min
    argopt = np.argmax if view.orientation == "max" else np.argmin

    if view.horizon is not None:
        assert view.period is not None
        V = np.zeros(view.n_states)
        act = np.zeros(view.n_states, dtype=int)
        order = sorted(
            (x for x in range(view.n_states) if x != view.absorbing),
            key=lambda x: -int(view.period[x]),
        )
        for x in order:
            # Same expression as the per-scenario inner problem relies on.
            vals = view.cost[x] + view.kernel[x] @ V
            V[x] = opt(vals)
            act[x] = argopt(vals)
        V.setflags(write=False)
        return V, act

    if isinstance(view.regime, FiniteHorizon):
        raise ValueError("embed a finite-horizon view before solving")

    stacked = stack_view(view)
    alpha = regime_alpha(view.regime)
    V = np.zeros(view.n_states)
    history: list[float] = []
    qa = stacked.cost
    for _ in range(max_sweeps):
        qa = stacked.cost + alpha * np.einsum("san,n->sa", stacked.kernel, V)
        block = opt(qa, axis=1)
        delta = float(np.abs(block - V[stacked.states]).max())
        V[stacked.states] = block
        if float(np.abs(block).max()) > value_cap:
            raise UnboundedValue(
                f"value exceeded {value_cap:.1e}; fixed policy is improper"
            )
        if delta <= tol:
            break
        history.append(delta)
        if _stalled(history, delta, tol, float(np.abs(block).max())):
            if view.orientation == "max" and isinstance(view.regime, Ssp):
                raise UnboundedValue(
                    f"value iteration diverges (delta pinned at {delta:.3e}); "
                    "fixed policy is improper"
                )
            raise NoConvergence(
                f"value iteration stalled at delta {delta:.3e}", delta
            )
    else:
        raise NoConvergence(
            f"no convergence within {max_sweeps} sweeps (last delta {delta:.3e})",
            delta,
        )
    act = np.zeros(view.n_states, dtype=int)
    act[stacked.states] = argopt(qa, axis=1)
    V.setflags(write=False)
    return V, act


def best_response(
    model: GameModel,
    fixed: MixedPolicy,
    fixed_player: str,
    tol: float = 1e-10,
    max_sweeps: int = 100_000,
    value_cap: float = 1e8,
) -> tuple[np.ndarray, MixedPolicy]:
    """Optimal value and a pure responder policy against a fixed opponent.

    Fixing A leaves B minimizing (the result lower-bounds the game value);
    fixing B leaves A maximizing (an upper bound).
    """
    view = fix_player(model, fixed, fixed_player)
    values, actions = solve_view(
        view, tol=tol, max_sweeps=max_sweeps, value_cap=value_cap
    )
    responder = PLAYER_B if fixed_player == PLAYER_A else PLAYER_A
    return values, pure_policy(model, responder, actions)


# ---------------------------------------------------------------------------
# Naive policy iteration


@dataclass(frozen=True)
class PolicyIterationRound:
    mu: MixedPolicy
    nu: MixedPolicy
    values: np.ndarray


@dataclass(frozen=True)
class PolicyIterationTrace:
    """Rounds of alternating evaluate/update, with convergence diagnostics.

    The scheme has no general convergence guarantee, so the trace records
    the sup-norm steps between successive value functions and whether they
    shrank monotonically instead of asserting convergence.
    """

    rounds: tuple[PolicyIterationRound, ...]
    deltas: tuple[float, ...]
    converged: bool
    failure: str | None = None

    @property
    def monotone_deltas(self) -> bool:
        return all(b <= a + 1e-12 for a, b in zip(self.deltas, self.deltas[1:]))


def naive_policy_iteration(
    model: GameModel,
    mu0: MixedPolicy,
    nu0: MixedPolicy,
    rounds: int,
    tol: float = 1e-9,
) -> PolicyIterationTrace:
    """Alternate policy-pair evaluation with stagewise matrix-game updates.

    Round 0 records the initial pair and its exact value; each later round
    replaces the pair by the equilibrium strategies of the one-step
    lookahead games at the previous value function. A pair that turns
    improper mid-run truncates the trace and sets ``failure``.
    """
    mu, nu = mu0, nu0
    J = evaluate_policy_pair(model, mu, nu)
    recs = [PolicyIterationRound(mu=mu, nu=nu, values=J)]
    deltas: list[float] = []
    failure = None
    for k in range(rounds):
        _, mu_new, nu_new = shapley_backup(model, J)
        try:
            J_new = evaluate_policy_pair(model, mu_new, nu_new)
        except ImproperPair as exc:
            failure = f"round {k + 1}: {exc}"
            break
        deltas.append(float(np.abs(J_new - J).max()))
        mu, nu, J = mu_new, nu_new, J_new
        recs.append(PolicyIterationRound(mu=mu, nu=nu, values=J))
    converged = failure is None and bool(deltas) and deltas[-1] <= tol
    return PolicyIterationTrace(
        rounds=tuple(recs),
        deltas=tuple(deltas),
        converged=converged,
        failure=failure,
    )


# ---------------------------------------------------------------------------
# Sandwich bounds


@dataclass(frozen=True)
class SandwichResult:
    """Exact best-response interval around the game value for a policy pair.

    ``lower`` is B's best response to mu_hat, ``upper`` is A's best response
    to nu_hat; the game value lies between them at every state, as does the
    pair's own value.
    """

    lower: np.ndarray
    upper: np.ndarray
    pair_value: np.ndarray
    responder_a: MixedPolicy
    responder_b: MixedPolicy


def sandwich(
    model: GameModel,
    mu_hat: MixedPolicy,
    nu_hat: MixedPolicy,
    tol: float = 1e-10,
) -> SandwichResult:
    lower, resp_b = best_response(model, mu_hat, PLAYER_A, tol=tol)
    upper, resp_a = best_response(model, nu_hat, PLAYER_B, tol=tol)
    pair = evaluate_policy_pair(model, mu_hat, nu_hat)
    if np.any(lower > pair + 1e-7) or np.any(pair > upper + 1e-7):
        raise RuntimeError(
            "best-response interval failed to bracket the pair value; "
            "responses did not converge"
        )
    return SandwichResult(
        lower=lower,
        upper=upper,
        pair_value=pair,
        responder_a=resp_a,
        responder_b=resp_b,
    )
