"""Deterministic two-agent Mini-Pommerman simulator.

Board generation, simultaneous-move dynamics, scripted opponents,
observation encoding and text serialization. Everything is a pure
function of its inputs plus explicit seeds; states are copied, never
shared, so any operation is safe to call from any thread.
"""
from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

MAX_TICKS = 800
BOMB_TIMER = 10
FLAME_LIFETIME = 2
N_CHANNELS = 28
MAX_AGENT_SLOTS = 4
START_AMMO = 1
START_BLAST = 2


class ContractViolation(Exception):
    """An operation was called outside its stated preconditions."""


class BoardGenerationError(Exception):
    """Could not produce a connected board for the given densities."""


class Action(IntEnum):
    STOP = 0
    UP = 1
    DOWN = 2
    LEFT = 3
    RIGHT = 4
    BOMB = 5


MOVE_ACTIONS = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)
DELTAS = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
}


class CellKind(IntEnum):
    PASSAGE = 0
    RIGID = 1
    WOOD = 2


class Item(IntEnum):
    NONE = 0
    EXTRA_AMMO = 1
    BLAST_RADIUS = 2
    KICK = 3


class Outcome(IntEnum):
    AGENT0_WINS = 0
    AGENT1_WINS = 1
    TIE = 2


class DeathCause(IntEnum):
    OWN_BOMB = 0
    OPPONENT_BOMB = 1


@dataclass
class AgentState:
    id: int
    pos: tuple[int, int]
    ammo: int = START_AMMO
    blast_strength: int = START_BLAST
    can_kick: bool = False
    alive: bool = True

    def copy(self) -> "AgentState":
        return AgentState(self.id, self.pos, self.ammo, self.blast_strength,
                          self.can_kick, self.alive)


@dataclass
class Bomb:
    pos: tuple[int, int]
    timer: int
    blast_strength: int
    owner: int
    velocity: tuple[int, int] | None = None

    def copy(self) -> "Bomb":
        return Bomb(self.pos, self.timer, self.blast_strength, self.owner, self.velocity)


@dataclass
class Flame:
    pos: tuple[int, int]
    lifetime: int
    owner: int

    def copy(self) -> "Flame":
        return Flame(self.pos, self.lifetime, self.owner)


@dataclass
class GameState:
    size: int
    kind: np.ndarray          # int8 grid of CellKind
    hidden: np.ndarray        # int8 grid of Item hidden under wood
    visible: np.ndarray       # int8 grid of Item lying on passages
    agents: list[AgentState]
    bombs: list[Bomb] = field(default_factory=list)
    flames: list[Flame] = field(default_factory=list)
    tick: int = 0
    terminal: Outcome | None = None
    last_death_cause: list[DeathCause | None] = field(default_factory=lambda: [None, None])
    seed: int = 0
    kick_enabled: bool = True

    def copy(self) -> "GameState":
        return GameState(
            size=self.size,
            kind=self.kind.copy(),
            hidden=self.hidden.copy(),
            visible=self.visible.copy(),
            agents=[a.copy() for a in self.agents],
            bombs=[b.copy() for b in self.bombs],
            flames=[f.copy() for f in self.flames],
            tick=self.tick,
            terminal=self.terminal,
            last_death_cause=list(self.last_death_cause),
            seed=self.seed,
            kick_enabled=self.kick_enabled,
        )

    def in_bounds(self, pos: tuple[int, int]) -> bool:
        r, c = pos
        return 0 <= r < self.size and 0 <= c < self.size

    def bomb_at(self, pos: tuple[int, int]) -> Bomb | None:
        for b in self.bombs:
            if b.pos == pos:
                return b
        return None

    def flames_at(self, pos: tuple[int, int]) -> list[Flame]:
        return [f for f in self.flames if f.pos == pos]


@dataclass
class BoardDensity:
    wood: float = 0.25
    rigid: float = 0.15
    n_items: int = 6
    max_retries: int = 200


@dataclass
class StepResult:
    next: GameState
    rewards: tuple[float, float]
    done: bool


CORNERS = lambda n: [(0, 0), (0, n - 1), (n - 1, 0), (n - 1, n - 1)]


def _corner_zone(size: int, corner: tuple[int, int]) -> list[tuple[int, int]]:
    r, c = corner
    dr = 1 if r == 0 else -1
    dc = 1 if c == 0 else -1
    return [(r, c), (r + dr, c), (r, c + dc)]


def _connected(kind: np.ndarray, a: tuple[int, int], b: tuple[int, int]) -> bool:
    """Flood-fill over non-Rigid cells."""
    size = kind.shape[0]
    seen = {a}
    stack = [a]
    while stack:
        r, c = stack.pop()
        if (r, c) == b:
            return True
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if 0 <= nr < size and 0 <= nc < size and (nr, nc) not in seen \
                    and kind[nr, nc] != CellKind.RIGID:
                seen.add((nr, nc))
                stack.append((nr, nc))
    return False


def generate_board(seed: int, size: int = 8,
                   density: BoardDensity | None = None) -> GameState:
    """Random connected board with two agents in pseudo-random corners.

    Same seed gives a bit-identical state. Rejection-samples layouts until
    a path of non-Rigid cells connects the two agent corners.
    """
    density = density or BoardDensity()
    if size < 5:
        raise ContractViolation(f"size must be >= 5, got {size}")
    if not (0.0 <= density.wood <= 1.0 and 0.0 <= density.rigid <= 1.0
            and density.wood + density.rigid <= 1.0):
        raise BoardGenerationError("densities must lie in [0,1] and sum to <= 1")
    rng = random.Random(seed)
    corners = CORNERS(size)
    spawn = rng.sample(corners, 2)
    reserved = set()
    for corner in corners:
        reserved.update(_corner_zone(size, corner))
    eligible = [(r, c) for r in range(1, size - 1) for c in range(1, size - 1)
                if (r, c) not in reserved]
    n_wood = round(density.wood * len(eligible))
    n_rigid = round(density.rigid * len(eligible))

    for _ in range(density.max_retries):
        kind = np.zeros((size, size), dtype=np.int8)
        hidden = np.zeros((size, size), dtype=np.int8)
        visible = np.zeros((size, size), dtype=np.int8)
        chosen = rng.sample(eligible, n_wood + n_rigid)
        for r, c in chosen[:n_wood]:
            kind[r, c] = CellKind.WOOD
        for r, c in chosen[n_wood:]:
            kind[r, c] = CellKind.RIGID
        wood_cells = chosen[:n_wood]
        for r, c in rng.sample(wood_cells, min(density.n_items, len(wood_cells))):
            hidden[r, c] = rng.choice([Item.EXTRA_AMMO, Item.BLAST_RADIUS, Item.KICK])
        if _connected(kind, spawn[0], spawn[1]):
            agents = [AgentState(id=i, pos=spawn[i]) for i in range(2)]
            return GameState(size=size, kind=kind, hidden=hidden, visible=visible,
                             agents=agents, seed=seed)
    raise BoardGenerationError(
        f"no connected layout after {density.max_retries} retries (seed={seed})")


def legal_actions(state: GameState, agent_id: int) -> set[Action]:
    """Actions with an effect for this agent; always contains Stop when alive."""
    agent = state.agents[agent_id]
    if not agent.alive:
        return set()
    acts = {Action.STOP}
    if agent.ammo > 0 and state.bomb_at(agent.pos) is None:
        acts.add(Action.BOMB)
    for act in MOVE_ACTIONS:
        dr, dc = DELTAS[act]
        tgt = (agent.pos[0] + dr, agent.pos[1] + dc)
        if not state.in_bounds(tgt):
            continue
        if state.kind[tgt] != CellKind.PASSAGE:
            continue
        if state.bomb_at(tgt) is not None and not (agent.can_kick and state.kick_enabled):
            continue
        acts.add(act)
    return acts


def _blast_cells(state: GameState, bomb: Bomb) -> list[tuple[int, int]]:
    """Cross-shaped flame footprint: extent blast_strength-1 per direction,
    stopped by the first Rigid (excluded) or Wood (included) cell."""
    cells = [bomb.pos]
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        for k in range(1, bomb.blast_strength):
            pos = (bomb.pos[0] + dr * k, bomb.pos[1] + dc * k)
            if not state.in_bounds(pos) or state.kind[pos] == CellKind.RIGID:
                break
            cells.append(pos)
            if state.kind[pos] == CellKind.WOOD:
                break
    return cells


def _resolve_moves(state: GameState, actions: list[Action]) -> None:
    """Simultaneous movement with bounce-back on collisions and swaps.
    Kick attempts set the bomb's velocity; the kicker stays put."""
    positions = [a.pos for a in state.agents]
    targets = list(positions)
    for i, agent in enumerate(state.agents):
        if not agent.alive or actions[i] not in MOVE_ACTIONS:
            continue
        dr, dc = DELTAS[actions[i]]
        tgt = (agent.pos[0] + dr, agent.pos[1] + dc)
        if not state.in_bounds(tgt) or state.kind[tgt] != CellKind.PASSAGE:
            continue
        bomb = state.bomb_at(tgt)
        if bomb is not None:
            if agent.can_kick and state.kick_enabled:
                bomb.velocity = (dr, dc)
            continue
        targets[i] = tgt
    # Two-agent collision rules: same target or swap-through both bounce.
    if targets[0] == targets[1]:
        targets = list(positions)
    elif targets[0] == positions[1] and targets[1] == positions[0]:
        targets = list(positions)
    else:
        for i, j in ((0, 1), (1, 0)):
            if targets[i] == targets[j] or (targets[i] == positions[j] and targets[j] == positions[j]):
                targets[i] = positions[i]
    for agent, tgt in zip(state.agents, targets):
        agent.pos = tgt


def _slide_kicked_bombs(state: GameState) -> None:
    agent_cells = {a.pos for a in state.agents if a.alive}
    for bomb in state.bombs:
        if bomb.velocity is None:
            continue
        nxt = (bomb.pos[0] + bomb.velocity[0], bomb.pos[1] + bomb.velocity[1])
        if (not state.in_bounds(nxt) or state.kind[nxt] != CellKind.PASSAGE
                or state.bomb_at(nxt) is not None or nxt in agent_cells):
            bomb.velocity = None
            continue
        bomb.pos = nxt


def _explode(state: GameState) -> None:
    """Detonate timer-0 bombs plus chained bombs; spawn fresh flames."""
    exploding = [b for b in state.bombs if b.timer <= 0]
    flame_cells: dict[tuple[int, int], set[int]] = {}
    frontier = list(exploding)
    exploded = set(id(b) for b in exploding)
    while frontier:
        bomb = frontier.pop()
        for cell in _blast_cells(state, bomb):
            flame_cells.setdefault(cell, set()).add(bomb.owner)
            other = state.bomb_at(cell)
            if other is not None and id(other) not in exploded:
                exploded.add(id(other))
                frontier.append(other)
    if not exploded:
        return
    for bomb in state.bombs:
        if id(bomb) in exploded:
            state.agents[bomb.owner].ammo += 1
    state.bombs = [b for b in state.bombs if id(b) not in exploded]
    new_flames = []
    for cell, owners in flame_cells.items():
        if state.kind[cell] == CellKind.WOOD:
            state.kind[cell] = CellKind.PASSAGE
            if state.hidden[cell] != Item.NONE:
                state.visible[cell] = state.hidden[cell]
                state.hidden[cell] = Item.NONE
        for owner in sorted(owners):
            new_flames.append(Flame(cell, FLAME_LIFETIME, owner))
    state.flames.extend(new_flames)


def step(state: GameState, actions: tuple[Action, Action] | list[Action]) -> StepResult:
    """One simultaneous tick. Resolution order: moves, bomb placement,
    kicked-bomb slide, timer decrement, explosions and chains, flame
    lifetimes, deaths and pickups."""
    if state.terminal is not None:
        raise ContractViolation("cannot step a terminal state")
    actions = [Action(a) for a in actions]
    s = state.copy()

    _resolve_moves(s, actions)

    for i, agent in enumerate(s.agents):
        if agent.alive and actions[i] == Action.BOMB and agent.ammo > 0 \
                and s.bomb_at(agent.pos) is None:
            s.bombs.append(Bomb(agent.pos, BOMB_TIMER, agent.blast_strength, owner=i))
            agent.ammo -= 1

    _slide_kicked_bombs(s)

    for bomb in s.bombs:
        bomb.timer -= 1

    # Old flames burn down before this tick's explosions spawn new ones.
    for f in s.flames:
        f.lifetime -= 1
    s.flames = [f for f in s.flames if f.lifetime > 0]

    _explode(s)

    for i, agent in enumerate(s.agents):
        if not agent.alive:
            continue
        covering = s.flames_at(agent.pos)
        if covering:
            agent.alive = False
            own = any(f.owner == i for f in covering)
            s.last_death_cause[i] = DeathCause.OWN_BOMB if own else DeathCause.OPPONENT_BOMB
        elif s.visible[agent.pos] != Item.NONE:
            item = Item(s.visible[agent.pos])
            if item == Item.EXTRA_AMMO:
                agent.ammo += 1
            elif item == Item.BLAST_RADIUS:
                agent.blast_strength += 1
            elif item == Item.KICK:
                agent.can_kick = True
            s.visible[agent.pos] = Item.NONE

    s.tick += 1
    a0, a1 = (a.alive for a in s.agents)
    rewards = (0.0, 0.0)
    if not a0 and not a1:
        s.terminal = Outcome.TIE
        rewards = (-1.0, -1.0)
    elif not a1:
        s.terminal = Outcome.AGENT0_WINS
        rewards = (1.0, -1.0)
    elif not a0:
        s.terminal = Outcome.AGENT1_WINS
        rewards = (-1.0, 1.0)
    elif s.tick >= MAX_TICKS:
        s.terminal = Outcome.TIE
        rewards = (-1.0, -1.0)
    return StepResult(next=s, rewards=rewards, done=s.terminal is not None)


# ---------------------------------------------------------------------------
# Observation encoding

def encode_observation(state: GameState, agent_id: int) -> np.ndarray:
    """28-channel egocentric feature stack, float64, shape (28, size, size).

    Layout: 0 passage, 1 rigid, 2 wood, 3-5 visible items by kind,
    6 bomb timer/10, 7 bomb strength, 8 flame present, 9 flame lifetime/2,
    10-13 agent positions (self first, then others by id, unused slots zero),
    14-25 ability triples (ammo/8, blast/8, kick) per slot, 26 self-plane
    duplicate, 27 tick/800.
    """
    n = state.size
    obs = np.zeros((N_CHANNELS, n, n), dtype=np.float64)
    obs[0] = state.kind == CellKind.PASSAGE
    obs[1] = state.kind == CellKind.RIGID
    obs[2] = state.kind == CellKind.WOOD
    for k in (Item.EXTRA_AMMO, Item.BLAST_RADIUS, Item.KICK):
        obs[2 + k] = state.visible == k
    for bomb in state.bombs:
        obs[6][bomb.pos] = bomb.timer / BOMB_TIMER
        obs[7][bomb.pos] = bomb.blast_strength
    for flame in state.flames:
        obs[8][flame.pos] = 1.0
        obs[9][flame.pos] = max(obs[9][flame.pos], flame.lifetime / FLAME_LIFETIME)
    order = [agent_id] + [a.id for a in state.agents if a.id != agent_id]
    for slot, aid in enumerate(order):
        agent = state.agents[aid]
        if not agent.alive:
            continue
        obs[10 + slot][agent.pos] = 1.0
        obs[14 + 3 * slot] = agent.ammo / 8.0
        obs[15 + 3 * slot] = agent.blast_strength / 8.0
        obs[16 + 3 * slot] = 1.0 if agent.can_kick else 0.0
    obs[26] = obs[10]
    obs[27] = state.tick / MAX_TICKS
    return obs


# ---------------------------------------------------------------------------
# Scripted policies

def static_policy(*_ignored) -> Action:
    """The always-stay-put opponent."""
    return Action.STOP


def _hazard_cells(state: GameState) -> set[tuple[int, int]]:
    """Cells on fire now or inside any live bomb's future blast."""
    cells = {f.pos for f in state.flames}
    for bomb in state.bombs:
        cells.update(_blast_cells(state, bomb))
    return cells


def _dijkstra(state: GameState, start: tuple[int, int],
              hazard: set[tuple[int, int]], hazard_cost: int = 8):
    """Shortest paths over passage cells; hazard cells cost extra.
    Returns (dist, first_step) maps keyed by cell."""
    dist = {start: 0}
    first: dict[tuple[int, int], Action] = {}
    heap = [(0, start, Action.STOP)]
    while heap:
        d, pos, via = heapq.heappop(heap)
        if d > dist.get(pos, 1 << 30):
            continue
        for act in MOVE_ACTIONS:
            dr, dc = DELTAS[act]
            nxt = (pos[0] + dr, pos[1] + dc)
            if not state.in_bounds(nxt) or state.kind[nxt] != CellKind.PASSAGE:
                continue
            if state.bomb_at(nxt) is not None:
                continue
            nd = d + (hazard_cost if nxt in hazard else 1)
            if nd < dist.get(nxt, 1 << 30):
                dist[nxt] = nd
                first[nxt] = via if via != Action.STOP else act
                heapq.heappush(heap, (nd, nxt, first[nxt]))
    return dist, first


def _line_of_fire(state: GameState, src: tuple[int, int], dst: tuple[int, int],
                  blast_strength: int) -> bool:
    """Would a bomb at src (given strength) reach dst?"""
    if src == dst:
        return True
    dr = dst[0] - src[0]
    dc = dst[1] - src[1]
    if dr != 0 and dc != 0:
        return False
    dist = abs(dr) + abs(dc)
    if dist > blast_strength - 1:
        return False
    ur, uc = (np.sign(dr), np.sign(dc))
    for k in range(1, dist):
        cell = (src[0] + ur * k, src[1] + uc * k)
        if state.kind[cell] != CellKind.PASSAGE:
            return False
    return True


def rule_based_policy(state: GameState, agent_id: int, rng_seed: int) -> Action:
    """Dijkstra-guided heuristic: evade blasts, bomb nearby opponents,
    otherwise head for power-ups or wood."""
    agent = state.agents[agent_id]
    if not agent.alive:
        raise ContractViolation("rule_based_policy called for a dead agent")
    rng = random.Random(rng_seed)
    hazard = _hazard_cells(state)
    dist, first = _dijkstra(state, agent.pos, hazard)

    if agent.pos in hazard:
        safe = [(d, p) for p, d in dist.items() if p not in hazard and p != agent.pos]
        if safe:
            best = min(d for d, _ in safe)
            choices = sorted(p for d, p in safe if d == best)
            return first[rng.choice(choices)]
        return Action.STOP

    opponent = state.agents[1 - agent_id]
    if opponent.alive and agent.ammo > 0 and state.bomb_at(agent.pos) is None \
            and _line_of_fire(state, agent.pos, opponent.pos, agent.blast_strength):
        return Action.BOMB

    items = [p for p, d in dist.items()
             if state.visible[p] != Item.NONE and p not in hazard]
    if items:
        best = min(dist[p] for p in items)
        choices = sorted(p for p in items if dist[p] == best)
        return first[rng.choice(choices)]

    # Head for the nearest reachable cell adjacent to wood; bomb once there.
    near_wood = []
    for p, d in dist.items():
        for act in MOVE_ACTIONS:
            dr, dc = DELTAS[act]
            w = (p[0] + dr, p[1] + dc)
            if state.in_bounds(w) and state.kind[w] == CellKind.WOOD:
                near_wood.append(p)
                break
    if near_wood:
        if agent.pos in near_wood:
            if agent.ammo > 0 and state.bomb_at(agent.pos) is None:
                return Action.BOMB
            return Action.STOP
        best = min(dist[p] for p in near_wood)
        choices = sorted(p for p in near_wood if dist[p] == best)
        if best > 0:
            return first[rng.choice(choices)]
    return Action.STOP


# ---------------------------------------------------------------------------
# Serialization: line-oriented board/replay text format

_KIND_CHARS = {}


def _cell_char(state: GameState, r: int, c: int) -> str:
    k = state.kind[r, c]
    if k == CellKind.RIGID:
        return "#"
    if k == CellKind.WOOD:
        h = state.hidden[r, c]
        return {Item.NONE: "W", Item.EXTRA_AMMO: "a",
                Item.BLAST_RADIUS: "b", Item.KICK: "c"}[Item(h)]
    v = state.visible[r, c]
    return {Item.NONE: ".", Item.EXTRA_AMMO: "A",
            Item.BLAST_RADIUS: "B", Item.KICK: "C"}[Item(v)]


def save_board(state: GameState) -> str:
    lines = [f"{state.size} {state.tick} {state.seed}",
             f"kick {int(state.kick_enabled)}"]
    for r in range(state.size):
        lines.append("".join(_cell_char(state, r, c) for c in range(state.size)))
    for a in state.agents:
        cause = -1 if state.last_death_cause[a.id] is None else int(state.last_death_cause[a.id])
        lines.append(f"agent {a.id} {a.pos[0]} {a.pos[1]} {a.ammo} "
                     f"{a.blast_strength} {int(a.can_kick)} {int(a.alive)} {cause}")
    for b in state.bombs:
        vr, vc = b.velocity if b.velocity is not None else (0, 0)
        lines.append(f"bomb {b.pos[0]} {b.pos[1]} {b.timer} {b.blast_strength} "
                     f"{b.owner} {vr} {vc}")
    for f in state.flames:
        lines.append(f"flame {f.pos[0]} {f.pos[1]} {f.lifetime} {f.owner}")
    term = "none" if state.terminal is None else state.terminal.name
    lines.append(f"terminal {term}")
    return "\n".join(lines) + "\n"


def load_board(text: str) -> GameState:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    size, tick, seed = (int(x) for x in lines[0].split())
    kick_enabled = bool(int(lines[1].split()[1]))
    kind = np.zeros((size, size), dtype=np.int8)
    hidden = np.zeros((size, size), dtype=np.int8)
    visible = np.zeros((size, size), dtype=np.int8)
    for r in range(size):
        row = lines[2 + r]
        for c, ch in enumerate(row):
            if ch == "#":
                kind[r, c] = CellKind.RIGID
            elif ch in "Wabc":
                kind[r, c] = CellKind.WOOD
                hidden[r, c] = {"W": 0, "a": 1, "b": 2, "c": 3}[ch]
            else:
                visible[r, c] = {".": 0, "A": 1, "B": 2, "C": 3}[ch]
    agents: list[AgentState] = []
    bombs: list[Bomb] = []
    flames: list[Flame] = []
    terminal = None
    causes: list[DeathCause | None] = [None, None]
    for ln in lines[2 + size:]:
        parts = ln.split()
        if parts[0] == "agent":
            aid, r, c, ammo, blast, kick, alive, cause = (int(x) for x in parts[1:])
            agents.append(AgentState(aid, (r, c), ammo, blast, bool(kick), bool(alive)))
            causes[aid] = None if cause < 0 else DeathCause(cause)
        elif parts[0] == "bomb":
            r, c, timer, blast, owner, vr, vc = (int(x) for x in parts[1:])
            vel = None if (vr, vc) == (0, 0) else (vr, vc)
            bombs.append(Bomb((r, c), timer, blast, owner, vel))
        elif parts[0] == "flame":
            r, c, life, owner = (int(x) for x in parts[1:])
            flames.append(Flame((r, c), life, owner))
        elif parts[0] == "terminal":
            terminal = None if parts[1] == "none" else Outcome[parts[1]]
    agents.sort(key=lambda a: a.id)
    return GameState(size=size, kind=kind, hidden=hidden, visible=visible,
                     agents=agents, bombs=bombs, flames=flames, tick=tick,
                     terminal=terminal, last_death_cause=causes, seed=seed,
                     kick_enabled=kick_enabled)


def save_replay(initial: GameState, actions: list[tuple[Action, Action]]) -> str:
    out = save_board(initial)
    for a0, a1 in actions:
        out += f"act {int(a0)} {int(a1)}\n"
    return out


def load_replay(text: str) -> tuple[GameState, list[tuple[Action, Action]]]:
    board_lines = []
    actions = []
    for ln in text.splitlines():
        if ln.startswith("act "):
            _, a0, a1 = ln.split()
            actions.append((Action(int(a0)), Action(int(a1))))
        else:
            board_lines.append(ln)
    return load_board("\n".join(board_lines)), actions


def run_replay(initial: GameState, actions: list[tuple[Action, Action]]) -> GameState:
    state = initial
    for pair in actions:
        state = step(state, pair).next
        if state.terminal is not None:
            break
    return state
