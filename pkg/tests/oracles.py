"""Independent oracles for the test suite.

Everything here recomputes expected values from first principles (episodic
simulation, forward distribution recursions, closed forms) without going
through the code paths under test.
"""

from __future__ import annotations

import numpy as np

from zsgdual.games import Discounted, GameModel, MixedPolicy, Ssp


def _draw(cum: np.ndarray, r: float) -> int:
    return int(np.searchsorted(cum, r, side="right").clip(max=len(cum) - 1))


def rollout_pair(
    model: GameModel,
    mu: MixedPolicy,
    nu: MixedPolicy,
    x0: int,
    n_episodes: int,
    seed: int,
    step_cap: int = 100_000,
) -> tuple[float, float]:
    """Episodic Monte Carlo estimate of the pair's cost-to-go at x0.

    Discounting is handled by geometric killing (continue w.p. alpha), which
    keeps the estimator unbiased. Returns (mean, standard error).
    """
    rng = np.random.default_rng(seed)
    alpha = model.regime.alpha if isinstance(model.regime, Discounted) else 1.0
    absorbing = model.regime.absorbing if isinstance(model.regime, Ssp) else None
    cum_mu = [np.cumsum(v) for v in mu.probs]
    cum_nu = [np.cumsum(v) for v in nu.probs]
    cum_p = [np.cumsum(t, axis=2) for t in model.transition]

    totals = np.empty(n_episodes)
    for ep in range(n_episodes):
        x = x0
        total = 0.0
        for _ in range(step_cap):
            if x == absorbing:
                break
            u = _draw(cum_mu[x], rng.random())
            v = _draw(cum_nu[x], rng.random())
            j = _draw(cum_p[x][u, v], rng.random())
            total += model.cost[x][u, v, j]
            x = j
            # Kill after the stage: stage t then carries weight alpha^t.
            if alpha < 1.0 and rng.random() >= alpha:
                break
        else:
            raise RuntimeError("episode failed to terminate")
        totals[ep] = total
    return float(totals.mean()), float(totals.std(ddof=1) / np.sqrt(n_episodes))


def finite_forward_value(
    model: GameModel, mu: MixedPolicy, nu: MixedPolicy, x0: int, periods: int
) -> float:
    """Exact expected total cost over a fixed number of periods, by pushing
    the state distribution forward on the raw (unembedded) game."""
    n = model.n_states
    P = np.zeros((n, n))
    G = np.zeros(n)
    for i in range(n):
        P[i] = np.einsum("u,v,uvj->j", mu[i], nu[i], model.transition[i])
        G[i] = np.einsum(
            "u,v,uvj,uvj->", mu[i], nu[i], model.transition[i], model.cost[i]
        )
    dist = np.zeros(n)
    dist[x0] = 1.0
    total = 0.0
    for _ in range(periods):
        total += float(dist @ G)
        dist = dist @ P
    return total


def two_by_two_game_value(R: np.ndarray) -> float:
    """Closed-form value of a 2x2 matrix game via support enumeration."""
    R = np.asarray(R, dtype=float)
    for i in range(2):
        for j in range(2):
            if R[i, j] >= R[:, j].max() and R[i, j] <= R[i, :].min():
                return float(R[i, j])
    den = R[0, 0] + R[1, 1] - R[0, 1] - R[1, 0]
    return float((R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]) / den)


def random_discounted_game(
    rng: np.random.Generator,
    n_states: int = 4,
    max_actions: int = 3,
    alpha: float = 0.85,
) -> GameModel:
    from zsgdual.games import make_game

    transition, cost = [], []
    for _ in range(n_states):
        na = int(rng.integers(1, max_actions + 1))
        nb = int(rng.integers(1, max_actions + 1))
        p = rng.dirichlet(np.ones(n_states), size=(na, nb))
        g = rng.uniform(-5.0, 5.0, size=(na, nb, n_states))
        transition.append(p)
        cost.append(g)
    return make_game(Discounted(alpha=alpha), transition, cost, root=0)


def random_ssp_game(
    rng: np.random.Generator, n_states: int = 4, max_actions: int = 2
) -> GameModel:
    """Random absorbing-state game where every action can terminate."""
    from zsgdual.games import make_game

    absorbing = n_states - 1
    transition, cost = [], []
    for i in range(n_states - 1):
        na = int(rng.integers(1, max_actions + 1))
        nb = int(rng.integers(1, max_actions + 1))
        p = rng.dirichlet(np.ones(n_states), size=(na, nb))
        p[:, :, absorbing] += 0.2  # uniform absorption floor keeps pairs proper
        p /= p.sum(axis=2, keepdims=True)
        g = rng.uniform(0.0, 3.0, size=(na, nb, n_states))
        transition.append(p)
        cost.append(g)
    p_abs = np.zeros((1, 1, n_states))
    p_abs[0, 0, absorbing] = 1.0
    transition.append(p_abs)
    cost.append(np.zeros((1, 1, n_states)))
    return make_game(Ssp(absorbing=absorbing), transition, cost, root=0)


def random_policy(rng: np.random.Generator, model: GameModel, player: str):
    from zsgdual.games import PLAYER_A, make_policy

    counts = model.actions_a if player == PLAYER_A else model.actions_b
    return make_policy([rng.dirichlet(np.ones(c)) for c in counts])
