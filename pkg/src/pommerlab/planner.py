"""Vanilla UCT planner used as a black-box, non-expert demonstrator.

A fresh tree is built per call: selection by UCB over expanded children,
expansion of one untried action per iteration, limited-depth uniform (or
network-biased) rollouts, and undiscounted back-propagation of the raw
outcome. Opponent moves are sampled uniformly at random whenever a child
state is generated and during rollouts.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .engine import (
    Action,
    ContractViolation,
    GameState,
    encode_observation,
    legal_actions,
    step,
)


@dataclass
class PlannerConfig:
    n_rollouts: int = 75
    rollout_depth: int = 24
    exploration_c: float = math.sqrt(2)
    rollout_policy: str = "uniform"   # "uniform" | "network"

    def __post_init__(self):
        if self.n_rollouts < 1 or self.rollout_depth < 1 or self.exploration_c < 0:
            raise ContractViolation("invalid planner configuration")
        if self.rollout_policy not in ("uniform", "network"):
            raise ContractViolation(f"unknown rollout policy {self.rollout_policy!r}")


class SearchNode:
    """One state in the tree with per-action edge statistics."""

    __slots__ = ("state", "visits", "untried", "children", "edge_n", "edge_q")

    def __init__(self, state: GameState, agent_id: int):
        self.state = state
        self.visits = 1  # counts the node's own expansion
        self.untried = sorted(legal_actions(state, agent_id)) if state.terminal is None else []
        self.children: dict[Action, SearchNode] = {}
        self.edge_n: dict[Action, int] = {}
        self.edge_q: dict[Action, float] = {}


@dataclass
class PlanResult:
    action: Action
    visit_counts: dict[Action, int]


def ucb_score(q: float, n_parent: int, n_child: int, c: float) -> float:
    """Mean value plus exploration bonus; unvisited children score +inf."""
    if n_parent < 1:
        raise ContractViolation("n_parent must be >= 1")
    if n_child == 0:
        return math.inf
    return q + c * math.sqrt(math.log(n_parent) / n_child)


def backpropagate(path: list[tuple[SearchNode, Action]], value: float) -> None:
    """Update visit counts and running-mean action values along the path.
    The raw outcome is propagated without discounting."""
    for node, action in path:
        node.visits += 1
        n = node.edge_n.get(action, 0) + 1
        node.edge_n[action] = n
        q = node.edge_q.get(action, 0.0)
        node.edge_q[action] = q + (value - q) / n


def _opponent_action(state: GameState, opponent_id: int, rng: random.Random) -> Action:
    acts = sorted(legal_actions(state, opponent_id))
    return rng.choice(acts) if acts else Action.STOP


def _terminal_value(state: GameState, agent_id: int) -> float:
    # Rewards mirror the engine's terminal payout from this agent's side.
    me, other = state.agents[agent_id], state.agents[1 - agent_id]
    if me.alive and not other.alive:
        return 1.0
    return -1.0


def run_rollout(state: GameState, agent_id: int, depth: int,
                rng: random.Random | int, policy: str = "uniform",
                net=None) -> float:
    """Simulate to termination or depth cutoff. Self plays the rollout
    policy, the opponent plays uniformly at random. Cutoff value is 0."""
    if isinstance(rng, int):
        rng = random.Random(rng)
    if depth < 0:
        raise ContractViolation("depth must be >= 0")
    if state.terminal is not None:
        return _terminal_value(state, agent_id)
    for _ in range(depth):
        if policy == "network":
            probs = net.action_probs(encode_observation(state, agent_id))
            my = Action(rng.choices(range(6), weights=probs)[0])
        else:
            acts = sorted(legal_actions(state, agent_id))
            my = rng.choice(acts) if acts else Action.STOP
        opp = _opponent_action(state, 1 - agent_id, rng)
        pair = (my, opp) if agent_id == 0 else (opp, my)
        result = step(state, pair)
        state = result.next
        if result.done:
            return result.rewards[agent_id]
    return 0.0


def search(state: GameState, agent_id: int, config: PlannerConfig,
           rng: random.Random | int, net=None) -> SearchNode:
    """Build a fresh tree with n_rollouts UCT iterations and return its root."""
    if state.terminal is not None:
        raise ContractViolation("cannot plan from a terminal state")
    if (config.rollout_policy == "network") != (net is not None):
        raise ContractViolation("net must be provided iff rollout_policy is 'network'")
    if isinstance(rng, int):
        rng = random.Random(rng)
    root = SearchNode(state, agent_id)
    for _ in range(config.n_rollouts):
        node = root
        path: list[tuple[SearchNode, Action]] = []
        while node.state.terminal is None and not node.untried:
            action = max(
                node.children,
                key=lambda a: (ucb_score(node.edge_q[a], node.visits,
                                         node.edge_n[a], config.exploration_c), -int(a)),
            )
            path.append((node, action))
            node = node.children[action]
        if node.state.terminal is None:
            action = node.untried.pop(rng.randrange(len(node.untried)))
            opp = _opponent_action(node.state, 1 - agent_id, rng)
            pair = (action, opp) if agent_id == 0 else (opp, action)
            child = SearchNode(step(node.state, pair).next, agent_id)
            node.children[action] = child
            path.append((node, action))
            node = child
        if node.state.terminal is not None:
            value = _terminal_value(node.state, agent_id)
        else:
            value = run_rollout(node.state, agent_id, config.rollout_depth, rng,
                                config.rollout_policy, net)
        backpropagate(path, value)
    return root


def plan(state: GameState, agent_id: int, config: PlannerConfig, seed: int,
         net=None) -> PlanResult:
    """Run a full search and return the most visited root action, breaking
    ties at random. Deterministic given (state, config, seed, net)."""
    rng = random.Random(seed)
    root = search(state, agent_id, config, rng, net)
    counts = {a: root.edge_n.get(a, 0) for a in Action}
    best = max(root.edge_n.values())
    choices = sorted(a for a, n in root.edge_n.items() if n == best)
    return PlanResult(action=rng.choice(choices), visit_counts=counts)


def dump_tree(root: SearchNode, max_depth: int | None = None) -> str:
    """One line per node: depth, action from parent, visit count, Q."""
    lines: list[str] = []

    def walk(node: SearchNode, depth: int, action: Action | None, parent: SearchNode | None):
        label = "root" if action is None else action.name
        q = 0.0 if parent is None else parent.edge_q[action]
        lines.append(f"{depth} {label} n={node.visits} q={q:+.4f}")
        if max_depth is not None and depth >= max_depth:
            return
        for a in sorted(node.children):
            walk(node.children[a], depth + 1, a, node)

    walk(root, 0, None, None)
    return "\n".join(lines) + "\n"
