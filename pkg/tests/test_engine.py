import random

import numpy as np
import pytest

from pommerlab import engine
from pommerlab.engine import (
    Action,
    Bomb,
    BoardDensity,
    CellKind,
    ContractViolation,
    DeathCause,
    Flame,
    Item,
    Outcome,
    encode_observation,
    generate_board,
    legal_actions,
    load_board,
    load_replay,
    rule_based_policy,
    run_replay,
    save_board,
    save_replay,
    static_policy,
    step,
)
from helpers import bfs_distance, empty_board, oracle_blast_cells, set_walls


# ---------------------------------------------------------------------------
# Board generation

def test_generate_board_deterministic():
    a = generate_board(7, 8)
    b = generate_board(7, 8)
    assert save_board(a) == save_board(b)


def test_generate_board_connected():
    for seed in range(40):
        state = generate_board(seed, 8)
        p0, p1 = state.agents[0].pos, state.agents[1].pos
        # flood fill over non-rigid cells
        seen = {p0}
        stack = [p0]
        while stack:
            r, c = stack.pop()
            for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
                n = (r + dr, c + dc)
                if state.in_bounds(n) and n not in seen \
                        and state.kind[n] != CellKind.RIGID:
                    seen.add(n)
                    stack.append(n)
        assert p1 in seen


def test_generate_board_wood_fraction():
    # counting oracle: wood fraction of wall-eligible (interior) cells
    density = BoardDensity(wood=0.25)
    eligible = 6 * 6  # interior ring of an 8x8 board; corner zones lie outside
    total = 0
    woods = 0
    for seed in range(1000):
        state = generate_board(seed, 8, density)
        woods += int(np.sum(state.kind == CellKind.WOOD))
        total += eligible
    assert abs(woods / total - 0.25) < 0.05
    # walls never touch the border ring
    border = np.ones((8, 8), dtype=bool)
    border[1:-1, 1:-1] = False
    assert np.all(state.kind[border] == CellKind.PASSAGE)


def test_generate_board_corner_spawns_and_start_kit():
    corner_set = {(0, 0), (0, 7), (7, 0), (7, 7)}
    seen_pairs = set()
    for seed in range(30):
        state = generate_board(seed, 8)
        positions = {a.pos for a in state.agents}
        assert positions <= corner_set and len(positions) == 2
        seen_pairs.add(frozenset(positions))
        for a in state.agents:
            assert a.ammo == 1 and a.blast_strength == 2 and not a.can_kick
    assert len(seen_pairs) > 1  # corners are actually randomized


def test_generate_board_infeasible_density():
    with pytest.raises(engine.BoardGenerationError):
        generate_board(0, 8, BoardDensity(wood=0.2, rigid=0.9))


def test_generate_board_size_too_small():
    with pytest.raises(ContractViolation):
        generate_board(0, 4)


# ---------------------------------------------------------------------------
# Stepping

def test_bomb_explosion_flames():
    state = empty_board(8)
    state.bombs.append(Bomb((3, 3), timer=1, blast_strength=2, owner=0))
    nxt = step(state, (Action.STOP, Action.STOP)).next
    cells = {f.pos for f in nxt.flames}
    assert cells == {(3, 3), (2, 3), (4, 3), (3, 2), (3, 4)}
    assert all(f.lifetime == 2 for f in nxt.flames)
    assert not nxt.bombs


def test_offboard_move_is_noop():
    state = empty_board(8, a0=(0, 0))
    nxt = step(state, (Action.UP, Action.STOP)).next
    assert nxt.agents[0].pos == (0, 0)


def test_terminal_rewards_on_single_death():
    state = empty_board(8, a0=(0, 0), a1=(5, 5))
    state.bombs.append(Bomb((5, 5), timer=1, blast_strength=2, owner=0))
    res = step(state, (Action.STOP, Action.STOP))
    assert res.done
    assert res.rewards == (1.0, -1.0)
    assert res.next.terminal == Outcome.AGENT0_WINS
    assert res.next.last_death_cause[1] == DeathCause.OPPONENT_BOMB


def test_suicide_sets_own_bomb_cause():
    state = empty_board(8, a0=(2, 2), a1=(7, 7))
    state.bombs.append(Bomb((2, 2), timer=1, blast_strength=2, owner=0))
    res = step(state, (Action.STOP, Action.STOP))
    assert res.rewards == (-1.0, 1.0)
    assert res.next.last_death_cause[0] == DeathCause.OWN_BOMB


def test_step_terminal_state_raises():
    state = empty_board(8)
    state.terminal = Outcome.TIE
    with pytest.raises(ContractViolation):
        step(state, (Action.STOP, Action.STOP))


def test_simultaneous_target_bounce():
    state = empty_board(8, a0=(2, 2), a1=(2, 4))
    nxt = step(state, (Action.RIGHT, Action.LEFT)).next
    assert nxt.agents[0].pos == (2, 2)
    assert nxt.agents[1].pos == (2, 4)


def test_swap_through_bounce():
    state = empty_board(8, a0=(2, 2), a1=(2, 3))
    nxt = step(state, (Action.RIGHT, Action.LEFT)).next
    assert nxt.agents[0].pos == (2, 2)
    assert nxt.agents[1].pos == (2, 3)


def test_move_into_stationary_agent_blocked():
    state = empty_board(8, a0=(2, 2), a1=(2, 3))
    nxt = step(state, (Action.RIGHT, Action.STOP)).next
    assert nxt.agents[0].pos == (2, 2)


def test_bomb_placement_and_ammo_restore():
    state = empty_board(8, a0=(2, 2), a1=(7, 7))
    nxt = step(state, (Action.BOMB, Action.STOP)).next
    assert nxt.agents[0].ammo == 0
    bomb = nxt.bomb_at((2, 2))
    assert bomb is not None and bomb.timer == 9 and bomb.owner == 0
    # walk away and wait for the explosion
    nxt = step(nxt, (Action.DOWN, Action.STOP)).next
    nxt = step(nxt, (Action.DOWN, Action.STOP)).next
    nxt = step(nxt, (Action.DOWN, Action.STOP)).next
    for _ in range(7):
        assert nxt.terminal is None
        nxt = step(nxt, (Action.STOP, Action.STOP)).next
    assert not nxt.bombs
    assert nxt.agents[0].ammo == 1
    assert nxt.agents[0].alive


def test_bomb_explodes_after_ten_ticks():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.bombs.append(Bomb((4, 4), timer=10, blast_strength=2, owner=0))
    for i in range(9):
        state = step(state, (Action.STOP, Action.STOP)).next
        assert not state.flames, f"premature flames at tick {i + 1}"
    state = step(state, (Action.STOP, Action.STOP)).next
    assert state.flames


def test_chain_explosion_same_tick():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.bombs.append(Bomb((3, 3), timer=1, blast_strength=2, owner=0))
    state.bombs.append(Bomb((3, 4), timer=9, blast_strength=2, owner=1))
    nxt = step(state, (Action.STOP, Action.STOP)).next
    assert not nxt.bombs
    assert (3, 5) in {f.pos for f in nxt.flames}


def test_flame_lifetime_two_ticks():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.bombs.append(Bomb((4, 4), timer=1, blast_strength=2, owner=0))
    s1 = step(state, (Action.STOP, Action.STOP)).next
    assert {f.lifetime for f in s1.flames} == {2}
    s2 = step(s1, (Action.STOP, Action.STOP)).next
    assert {f.lifetime for f in s2.flames} == {1}
    s3 = step(s2, (Action.STOP, Action.STOP)).next
    assert not s3.flames


def test_wood_blocks_blast_and_reveals_item():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.kind[3, 4] = CellKind.WOOD
    state.hidden[3, 4] = Item.KICK
    state.bombs.append(Bomb((3, 3), timer=1, blast_strength=4, owner=0))
    nxt = step(state, (Action.STOP, Action.STOP)).next
    cells = {f.pos for f in nxt.flames}
    assert (3, 4) in cells and (3, 5) not in cells
    assert nxt.kind[3, 4] == CellKind.PASSAGE
    assert nxt.visible[3, 4] == Item.KICK
    assert nxt.hidden[3, 4] == Item.NONE


def test_rigid_blocks_blast_without_flame():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.kind[3, 4] = CellKind.RIGID
    state.bombs.append(Bomb((3, 3), timer=1, blast_strength=4, owner=0))
    nxt = step(state, (Action.STOP, Action.STOP)).next
    cells = {f.pos for f in nxt.flames}
    assert (3, 4) not in cells and (3, 5) not in cells


def test_pickup_applies_ability():
    state = empty_board(8, a0=(2, 2), a1=(7, 7))
    state.visible[2, 3] = Item.BLAST_RADIUS
    nxt = step(state, (Action.RIGHT, Action.STOP)).next
    assert nxt.agents[0].blast_strength == 3
    assert nxt.visible[2, 3] == Item.NONE


def test_kick_sets_velocity_and_slides():
    state = empty_board(8, a0=(2, 2), a1=(7, 7))
    state.agents[0].can_kick = True
    state.bombs.append(Bomb((2, 3), timer=9, blast_strength=2, owner=1))
    nxt = step(state, (Action.RIGHT, Action.STOP)).next
    assert nxt.agents[0].pos == (2, 2)  # the kicker stays put
    bomb = nxt.bombs[0]
    assert bomb.pos == (2, 4) and bomb.velocity == (0, 1)
    nxt = step(nxt, (Action.STOP, Action.STOP)).next
    assert nxt.bombs[0].pos == (2, 5)


def test_kick_disabled_via_config():
    state = empty_board(8, a0=(2, 2), a1=(7, 7))
    state.agents[0].can_kick = True
    state.kick_enabled = False
    state.bombs.append(Bomb((2, 3), timer=9, blast_strength=2, owner=1))
    nxt = step(state, (Action.RIGHT, Action.STOP)).next
    assert nxt.bombs[0].pos == (2, 3)
    assert nxt.bombs[0].velocity is None


def test_timeout_tie():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.tick = 799
    res = step(state, (Action.STOP, Action.STOP))
    assert res.done and res.rewards == (-1.0, -1.0)
    assert res.next.terminal == Outcome.TIE


# ---------------------------------------------------------------------------
# Legal actions

def test_legal_actions_fresh_corner():
    state = empty_board(8, a0=(0, 0))
    assert legal_actions(state, 0) == {Action.STOP, Action.BOMB,
                                       Action.DOWN, Action.RIGHT}


def test_legal_actions_no_ammo():
    state = empty_board(8, a0=(0, 0), ammo=0)
    assert Action.BOMB not in legal_actions(state, 0)


def test_legal_actions_walled_in():
    state = empty_board(8, a0=(3, 3))
    set_walls(state, [(2, 3), (4, 3), (3, 2), (3, 4)])
    assert legal_actions(state, 0) == {Action.STOP, Action.BOMB}


def test_legal_actions_dead_agent_empty():
    state = empty_board(8)
    state.agents[0].alive = False
    assert legal_actions(state, 0) == set()


def test_legal_actions_bomb_cell_needs_kick():
    state = empty_board(8, a0=(2, 2))
    state.bombs.append(Bomb((2, 3), timer=9, blast_strength=2, owner=1))
    assert Action.RIGHT not in legal_actions(state, 0)
    state.agents[0].can_kick = True
    assert Action.RIGHT in legal_actions(state, 0)


# ---------------------------------------------------------------------------
# Observation encoding

def test_observation_shape_and_finite():
    state = generate_board(3, 8)
    obs = encode_observation(state, 0)
    assert obs.shape == (28, 8, 8)
    assert np.all(np.isfinite(obs))


def test_observation_deterministic():
    state = generate_board(3, 8)
    assert np.array_equal(encode_observation(state, 1), encode_observation(state, 1))


def test_observation_bomb_planes():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.bombs.append(Bomb((2, 2), timer=4, blast_strength=3, owner=0))
    obs = encode_observation(state, 0)
    assert obs[6][2, 2] == pytest.approx(0.4)
    assert obs[7][2, 2] == 3
    assert np.sum(obs[6]) == pytest.approx(0.4)
    assert np.sum(obs[7]) == 3


def test_observation_agent_planes_egocentric():
    state = empty_board(8, a0=(1, 1), a1=(6, 6))
    for aid, other in ((0, 1), (1, 0)):
        obs = encode_observation(state, aid)
        assert obs[10][state.agents[aid].pos] == 1 and obs[10].sum() == 1
        assert obs[11][state.agents[other].pos] == 1 and obs[11].sum() == 1
        assert obs[12].sum() == 0 and obs[13].sum() == 0
        assert np.array_equal(obs[26], obs[10])


def test_observation_dead_agent_plane_zero():
    state = empty_board(8)
    state.agents[1].alive = False
    obs = encode_observation(state, 0)
    assert obs[11].sum() == 0


def test_observation_flame_lifetime_plane():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.flames.append(Flame((4, 4), lifetime=1, owner=0))
    obs = encode_observation(state, 0)
    assert obs[8][4, 4] == 1
    assert obs[9][4, 4] == pytest.approx(0.5)


# ---------------------------------------------------------------------------
# Scripted policies

def test_static_policy_always_stop():
    assert static_policy() == Action.STOP
    for _ in range(100):
        assert static_policy() == Action.STOP
    terminal = empty_board(8)
    terminal.terminal = Outcome.TIE
    assert static_policy(terminal, 0) == Action.STOP


def test_rule_based_bombs_adjacent_opponent():
    state = empty_board(8, a0=(3, 3), a1=(3, 4))
    assert rule_based_policy(state, 0, rng_seed=0) == Action.BOMB


def test_rule_based_evades_own_bomb():
    state = empty_board(8, a0=(3, 3), a1=(7, 7))
    set_walls(state, [(2, 3), (4, 3), (3, 2)])
    state.bombs.append(Bomb((3, 3), timer=9, blast_strength=2, owner=0))
    state.agents[0].ammo = 0
    # only open neighbor is (3, 4); escaping beats standing in the blast
    assert rule_based_policy(state, 0, rng_seed=0) == Action.RIGHT


def test_rule_based_heads_for_power_up():
    state = empty_board(8, a0=(3, 3), a1=(7, 7))
    state.visible[3, 6] = Item.EXTRA_AMMO
    assert bfs_distance(state, (3, 3), (3, 6)) == 3
    assert rule_based_policy(state, 0, rng_seed=0) == Action.RIGHT


def test_rule_based_deterministic_given_seed():
    state = generate_board(11, 8)
    acts = {rule_based_policy(state, 0, rng_seed=5) for _ in range(10)}
    assert len(acts) == 1


# ---------------------------------------------------------------------------
# Invariants over random episodes

def _random_episode(seed, max_steps=120):
    rng = random.Random(seed)
    state = generate_board(seed, 8)
    states = [state]
    actions = []
    for _ in range(max_steps):
        if state.terminal is not None:
            break
        pair = tuple(
            rng.choice(sorted(legal_actions(state, i)) or [Action.STOP])
            for i in range(2))
        actions.append(pair)
        state = step(state, pair).next
        states.append(state)
    return states, actions


@pytest.mark.parametrize("seed", range(8))
def test_invariants_random_episode(seed):
    states, _ = _random_episode(seed)
    rigid0 = int(np.sum(states[0].kind == CellKind.RIGID))
    prev_wood = int(np.sum(states[0].kind == CellKind.WOOD))
    for prev, cur in zip(states, states[1:]):
        assert cur.tick == prev.tick + 1
        assert int(np.sum(cur.kind == CellKind.RIGID)) == rigid0
        wood = int(np.sum(cur.kind == CellKind.WOOD))
        assert wood <= prev_wood
        prev_wood = wood
        for agent in cur.agents:
            if agent.alive:
                assert cur.kind[agent.pos] == CellKind.PASSAGE
        for bomb in cur.bombs:
            assert 0 <= bomb.timer <= 10
        # at most one bomb per cell
        cells = [b.pos for b in cur.bombs]
        assert len(cells) == len(set(cells))


@pytest.mark.parametrize("seed", range(4))
def test_ammo_bookkeeping(seed):
    states, _ = _random_episode(seed)
    for cur in states:
        for agent in cur.agents:
            if not agent.alive:
                continue
            live = sum(1 for b in cur.bombs if b.owner == agent.id)
            # ammo + own live bombs only grows via pickups
            assert agent.ammo + live >= 1
            assert agent.ammo >= 0


def test_replay_determinism():
    states, actions = _random_episode(21)
    final = run_replay(states[0], actions)
    assert save_board(final) == save_board(states[-1])


def test_flame_cells_match_blast_oracle():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    state.kind[2, 4] = CellKind.RIGID
    state.kind[4, 2] = CellKind.WOOD
    bomb = Bomb((3, 3), timer=1, blast_strength=5, owner=0)
    state.bombs.append(bomb)
    expected = oracle_blast_cells(state, bomb)
    nxt = step(state, (Action.STOP, Action.STOP)).next
    assert {f.pos for f in nxt.flames} == expected


def test_max_episode_length():
    state = empty_board(8, a0=(0, 0), a1=(7, 7))
    n = 0
    while state.terminal is None:
        state = step(state, (Action.STOP, Action.STOP)).next
        n += 1
    assert n == 800


# ---------------------------------------------------------------------------
# Serialization

def test_board_round_trip_rich_state():
    state = generate_board(5, 8)
    state = step(state, (Action.BOMB, Action.STOP)).next
    state = step(state, (Action.DOWN, Action.STOP)).next
    state.flames.append(Flame((4, 4), 1, 1))
    text = save_board(state)
    assert save_board(load_board(text)) == text


def test_replay_round_trip():
    states, actions = _random_episode(33, max_steps=40)
    text = save_replay(states[0], actions)
    initial, acts = load_replay(text)
    assert save_board(initial) == save_board(states[0])
    assert acts == actions
    assert save_board(run_replay(initial, acts)) == save_board(states[-1])
