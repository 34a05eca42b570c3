"""Exact analysis of the own-bomb suicide hazard under random movement.

A dynamic program tracks the position distribution of an agent that just
placed a bomb and then moves uniformly at random over the 5 non-bomb
actions for a fixed horizon, with the rest of the world frozen. Mass on
the bomb's flame cross at the horizon is the suicide probability. Path
counts are exact integers, so results carry no floating-point error.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .engine import (
    Action,
    AgentState,
    Bomb,
    CellKind,
    ContractViolation,
    DELTAS,
    GameState,
    MOVE_ACTIONS,
    _blast_cells,
)

WALK_ACTIONS = (Action.STOP,) + MOVE_ACTIONS  # the 5 non-bomb actions


@dataclass
class HazardQuery:
    state: GameState
    agent_id: int
    horizon: int = 9
    static_world: bool = True


@dataclass
class HazardResult:
    position_distribution: np.ndarray      # float grid at t=horizon
    suicide_probability: float
    flame_mask: np.ndarray                 # bool grid of the blast cross
    suicide_probability_exact: Fraction
    path_counts: np.ndarray                # object grid of exact path counts
    total_paths: int


def _validate(q: HazardQuery) -> Bomb | None:
    if q.horizon < 1:
        raise ContractViolation("horizon must be >= 1")
    agent = q.state.agents[q.agent_id]
    if not agent.alive:
        raise ContractViolation("hazard query requires a live agent")
    own = [b for b in q.state.bombs if b.owner == q.agent_id]
    if len(own) > 1:
        raise ContractViolation("hazard query assumes at most one live bomb")
    if q.static_world and q.state.flames:
        raise ContractViolation("static-world query cannot contain live flames")
    if q.static_world and any(b.velocity is not None for b in q.state.bombs):
        raise ContractViolation("static-world query cannot contain moving bombs")
    return own[0] if own else None


def _walk_targets(state: GameState, pos: tuple[int, int],
                  agent_id: int) -> list[tuple[int, int]]:
    """Resulting cell for each of the 5 walk actions; blocked moves stay."""
    out = [pos]
    opponent_cells = {a.pos for a in state.agents if a.alive and a.id != agent_id}
    for act in MOVE_ACTIONS:
        dr, dc = DELTAS[act]
        tgt = (pos[0] + dr, pos[1] + dc)
        if (not state.in_bounds(tgt) or state.kind[tgt] != CellKind.PASSAGE
                or tgt in opponent_cells):
            tgt = pos
        out.append(tgt)
    return out


def survival_distribution(q: HazardQuery) -> HazardResult:
    """Exact position distribution after `horizon` uniform random walk steps,
    and the probability mass caught in the bomb's flame cross."""
    bomb = _validate(q)
    state = q.state
    n = state.size
    counts = np.zeros((n, n), dtype=object)
    counts[state.agents[q.agent_id].pos] = 1
    for _ in range(q.horizon):
        nxt = np.zeros((n, n), dtype=object)
        for r in range(n):
            for c in range(n):
                m = counts[r, c]
                if m == 0:
                    continue
                for tgt in _walk_targets(state, (r, c), q.agent_id):
                    nxt[tgt] += m
        counts = nxt
    total = 5 ** q.horizon
    flame_mask = np.zeros((n, n), dtype=bool)
    if bomb is not None:
        for cell in _blast_cells(state, bomb):
            flame_mask[cell] = True
    dead = sum(int(counts[r, c]) for r in range(n) for c in range(n)
               if flame_mask[r, c])
    exact = Fraction(dead, total)
    dist = np.array([[int(counts[r, c]) / total for c in range(n)]
                     for r in range(n)], dtype=np.float64)
    return HazardResult(
        position_distribution=dist,
        suicide_probability=float(exact),
        flame_mask=flame_mask,
        suicide_probability_exact=exact,
        path_counts=counts,
        total_paths=total,
    )


def suicide_probability(q: HazardQuery) -> float:
    return survival_distribution(q).suicide_probability


def survival_after_bombs(p_suicide: float, b: int) -> float:
    """Chance of surviving b independent bomb placements: (1-p)^b."""
    if not 0.0 <= p_suicide <= 1.0:
        raise ContractViolation("p_suicide must lie in [0, 1]")
    if b < 0:
        raise ContractViolation("b must be >= 0")
    return (1.0 - p_suicide) ** b


def corridor_scenario(length: int = 10, bomb_strength: int = 10) -> GameState:
    """Worst-case corridor: a wood-flanked passage with the agent and a
    fresh bomb on the leftmost cell and a single perpendicular escape cell
    near the far end. With length=10, strength=10 exactly one of the 5^9
    nine-step walks survives."""
    if length < 2:
        raise ContractViolation("corridor length must be >= 2")
    size = max(length + 2, 5)
    kind = np.full((size, size), CellKind.RIGID, dtype=np.int8)
    row = 2
    c0 = 1
    for c in range(c0, c0 + length):
        kind[row, c] = CellKind.PASSAGE
    for c in range(c0, c0 + length):
        kind[row - 1, c] = CellKind.WOOD
        kind[row + 1, c] = CellKind.WOOD
    escape = (row - 1, c0 + length - 2)
    kind[escape] = CellKind.PASSAGE
    # Opponent parked in an isolated pocket so it cannot interfere.
    opp_pos = (size - 1, size - 1)
    kind[opp_pos] = CellKind.PASSAGE
    hidden = np.zeros((size, size), dtype=np.int8)
    visible = np.zeros((size, size), dtype=np.int8)
    agent_pos = (row, c0)
    agents = [AgentState(0, agent_pos, ammo=0, blast_strength=bomb_strength),
              AgentState(1, opp_pos)]
    bombs = [Bomb(agent_pos, timer=9, blast_strength=bomb_strength, owner=0)]
    return GameState(size=size, kind=kind, hidden=hidden, visible=visible,
                     agents=agents, bombs=bombs)


def min_evasion_steps(state: GameState, bomb: Bomb) -> dict[tuple[int, int], int]:
    """Per-cell minimum number of walk steps needed to stand outside the
    flame cross; 0 for cells already safe. BFS over passage cells."""
    flame = set(_blast_cells(state, bomb))
    dist: dict[tuple[int, int], int] = {}
    frontier = []
    n = state.size
    for r in range(n):
        for c in range(n):
            if state.kind[r, c] == CellKind.PASSAGE and (r, c) not in flame:
                dist[(r, c)] = 0
                frontier.append((r, c))
    while frontier:
        nxt = []
        for pos in frontier:
            for act in MOVE_ACTIONS:
                dr, dc = DELTAS[act]
                nb = (pos[0] + dr, pos[1] + dc)
                if (state.in_bounds(nb) and state.kind[nb] == CellKind.PASSAGE
                        and nb not in dist):
                    dist[nb] = dist[pos] + 1
                    nxt.append(nb)
        frontier = nxt
    return dist


def heatmap_csv(result: HazardResult) -> str:
    """Per-cell probability grid with flame cells marked with a trailing *."""
    lines = []
    n = result.position_distribution.shape[0]
    for r in range(n):
        row = []
        for c in range(n):
            cell = f"{result.position_distribution[r, c]:.6f}"
            if result.flame_mask[r, c]:
                cell += "*"
            row.append(cell)
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
