"""Shared test helpers: hand-built boards and independent oracles.

The oracles here deliberately avoid the library's own DP/search code
paths: random-walk outcomes are counted by exhaustive trajectory
enumeration and shortest paths by a fresh BFS.
"""
from __future__ import annotations

import random
from collections import deque

import numpy as np

from pommerlab.engine import (
    Action,
    AgentState,
    Bomb,
    CellKind,
    GameState,
    legal_actions,
    step,
)


def empty_board(size: int = 8, a0=(0, 0), a1=None, ammo: int = 1,
                blast: int = 2) -> GameState:
    a1 = a1 or (size - 1, size - 1)
    kind = np.zeros((size, size), dtype=np.int8)
    return GameState(
        size=size,
        kind=kind,
        hidden=np.zeros((size, size), dtype=np.int8),
        visible=np.zeros((size, size), dtype=np.int8),
        agents=[AgentState(0, a0, ammo=ammo, blast_strength=blast),
                AgentState(1, a1, ammo=ammo, blast_strength=blast)],
    )


def set_walls(state: GameState, cells, kind=CellKind.RIGID) -> GameState:
    for cell in cells:
        state.kind[cell] = kind
    return state


# ---------------------------------------------------------------------------
# Exhaustive random-walk enumeration (independent of the hazard DP)

WALK_DELTAS = [(0, 0), (-1, 0), (1, 0), (0, -1), (0, 1)]


def enumerate_walk_counts(state: GameState, agent_id: int,
                          horizon: int) -> dict[tuple[int, int], int]:
    """Count, over all 5^horizon action sequences, how many end on each
    cell. Blocked moves (walls, wood, board edge, the other agent) stay."""
    size = state.size
    passable = np.asarray(state.kind) == int(CellKind.PASSAGE)
    others = {a.pos for a in state.agents if a.alive and a.id != agent_id}
    counts: dict[tuple[int, int], int] = {}
    stack = [(state.agents[agent_id].pos, horizon)]
    while stack:
        pos, rem = stack.pop()
        if rem == 0:
            counts[pos] = counts.get(pos, 0) + 1
            continue
        r, c = pos
        for dr, dc in WALK_DELTAS:
            nr, nc = r + dr, c + dc
            if not (0 <= nr < size and 0 <= nc < size) or not passable[nr, nc] \
                    or (nr, nc) in others:
                nr, nc = r, c
            stack.append(((nr, nc), rem - 1))
    return counts


def oracle_blast_cells(state: GameState, bomb: Bomb) -> set[tuple[int, int]]:
    """Independent recomputation of a bomb's flame cross."""
    cells = {bomb.pos}
    for dr, dc in WALK_DELTAS[1:]:
        for k in range(1, bomb.blast_strength):
            pos = (bomb.pos[0] + dr * k, bomb.pos[1] + dc * k)
            if not (0 <= pos[0] < state.size and 0 <= pos[1] < state.size):
                break
            if state.kind[pos] == CellKind.RIGID:
                break
            cells.add(pos)
            if state.kind[pos] == CellKind.WOOD:
                break
    return cells


# ---------------------------------------------------------------------------
# BFS shortest-path oracle

def bfs_distance(state: GameState, start, goal) -> int | None:
    """Shortest path length over passage cells without bombs."""
    if start == goal:
        return 0
    seen = {start}
    q = deque([(start, 0)])
    bombs = {b.pos for b in state.bombs}
    while q:
        pos, d = q.popleft()
        for dr, dc in WALK_DELTAS[1:]:
            nxt = (pos[0] + dr, pos[1] + dc)
            if nxt == goal:
                return d + 1
            if not state.in_bounds(nxt) or state.kind[nxt] != CellKind.PASSAGE \
                    or nxt in bombs or nxt in seen:
                continue
            seen.add(nxt)
            q.append((nxt, d + 1))
    return None


# ---------------------------------------------------------------------------
# 2-ply survival enumeration for trap states

def safe_actions_two_ply(state: GameState) -> list[Action]:
    """Actions of agent 0 after which survival for two ticks is possible,
    assuming the opponent stands still."""
    safe = []
    for a in sorted(legal_actions(state, 0)):
        res1 = step(state, (a, Action.STOP))
        if not res1.next.agents[0].alive:
            continue
        if res1.done:
            safe.append(a)
            continue
        for b in sorted(legal_actions(res1.next, 0)) or [Action.STOP]:
            if step(res1.next, (b, Action.STOP)).next.agents[0].alive:
                safe.append(a)
                break
    return safe


def craft_trap_states(n: int, seed: int = 0, size: int = 6) -> list[GameState]:
    """Random states with live bombs where exactly one action keeps the
    agent alive through the next two ticks (verified by enumeration)."""
    rng = random.Random(seed)
    states = []
    while len(states) < n:
        state = empty_board(size, a0=(rng.randrange(size), rng.randrange(size)),
                            a1=(size - 1, size - 1))
        if state.agents[0].pos == state.agents[1].pos:
            continue
        for _ in range(rng.randrange(4, 10)):
            cell = (rng.randrange(size), rng.randrange(size))
            if cell not in (state.agents[0].pos, state.agents[1].pos):
                state.kind[cell] = CellKind.RIGID
        for _ in range(rng.randrange(1, 3)):
            r, c = state.agents[0].pos
            br = min(max(r + rng.randrange(-2, 3), 0), size - 1)
            bc = min(max(c + rng.randrange(-2, 3), 0), size - 1)
            if state.kind[br, bc] == CellKind.PASSAGE \
                    and state.bomb_at((br, bc)) is None \
                    and (br, bc) != state.agents[1].pos:
                state.bombs.append(Bomb((br, bc), timer=rng.randrange(1, 3),
                                        blast_strength=rng.randrange(2, 4),
                                        owner=0))
        if not state.bombs:
            continue
        safe = safe_actions_two_ply(state)
        if len(safe) == 1:
            states.append(state)
    return states
