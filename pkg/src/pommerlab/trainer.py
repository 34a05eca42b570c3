"""Asynchronous actor-critic training with optional MCTS demonstrators.

A coordinator owns the global parameter store. Each worker owns its own
environment, local network copy and (for demonstrators) planner. The
only shared operations are atomic parameter snapshots, atomic gradient
application and append-only metric emission. n_workers=1 runs inline on
the calling thread and is bit-reproducible.
"""
from __future__ import annotations

import csv
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import net as nets
from .engine import (
    Action,
    BoardDensity,
    DeathCause,
    GameState,
    Outcome,
    encode_observation,
    generate_board,
    rule_based_policy,
    static_policy,
    step,
)
from .net import ActorCritic, AdamState, LossWeights, NetworkArch
from .planner import PlannerConfig, plan


class TrainError(Exception):
    pass


@dataclass
class TrajectorySegment:
    observations: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    values: list = field(default_factory=list)
    policies: list = field(default_factory=list)
    demonstrator_onehots: list | None = None
    bootstrap_value: float = 0.0
    terminal: bool = False
    returns: list | None = None
    advantages: list | None = None

    def __len__(self) -> int:
        return len(self.actions)


def compute_returns_and_advantages(segment: TrajectorySegment, gamma: float) -> TrajectorySegment:
    """n-step discounted returns bootstrapped from the segment tail, and
    advantages against the recorded value estimates."""
    if len(segment) == 0:
        raise ValueError("empty segment")
    r = 0.0 if segment.terminal else segment.bootstrap_value
    returns = [0.0] * len(segment)
    for t in reversed(range(len(segment))):
        r = segment.rewards[t] + gamma * r
        returns[t] = r
    segment.returns = returns
    segment.advantages = [ret - v for ret, v in zip(returns, segment.values)]
    return segment


@dataclass
class TrainConfig:
    n_workers: int = 8
    k_demonstrators: int = 0
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    board: BoardDensity = field(default_factory=BoardDensity)
    gamma: float = 0.999
    t_max: int = 20
    lambda_imitation: float = 1.0
    opponent: str = "static"          # "static" | "rulebased"
    total_env_steps: int = 20000
    eval_every: int = 5000
    eval_episodes: int = 20
    seed: int = 0
    board_size: int = 8
    arch_preset: str = "desk"         # "desk" | "paper"
    lr: float = 1e-4
    adam_eps: float = 1e-5
    weight_decay: float = 1e-5
    clip_norm: float = 40.0

    def validate(self) -> None:
        if not 0 <= self.k_demonstrators <= self.n_workers:
            raise TrainError("k_demonstrators must lie in [0, n_workers]")
        if self.k_demonstrators == self.n_workers:
            raise TrainError("at least one model-free worker is required "
                             "(the step budget is counted on model-free workers)")
        if not 0 < self.gamma <= 1:
            raise TrainError("gamma must lie in (0, 1]")
        if self.opponent not in ("static", "rulebased"):
            raise TrainError(f"unknown opponent {self.opponent!r}")
        if self.arch_preset not in ("desk", "paper"):
            raise TrainError(f"unknown arch preset {self.arch_preset!r}")

    def make_arch(self) -> NetworkArch:
        if self.arch_preset == "desk":
            return NetworkArch.desk_scale(self.board_size)
        return NetworkArch(board_size=self.board_size)

    @property
    def label(self) -> str:
        return "A3C" if self.k_demonstrators == 0 else "PI-A3C"


@dataclass
class EpisodeRecord:
    worker_id: int
    is_demonstrator: bool
    outcome: str                      # Win | Loss | Tie
    reward: float
    length: int
    suicide: bool
    wallclock_s: float
    global_step: int
    env_steps: int


class GlobalStore:
    """Serialized-atomic parameter store: snapshots and gradient applies
    are mutually exclusive, so readers never observe a torn update."""

    def __init__(self, params: dict, config: TrainConfig):
        self._lock = threading.Lock()
        self.params = params
        self.adam = AdamState.for_params(params)
        self.config = config
        self.rejected = 0

    @property
    def step(self) -> int:
        return self.adam.step

    def snapshot(self) -> dict:
        with self._lock:
            return {k: p.copy() for k, p in self.params.items()}

    def apply_gradients(self, grads: dict) -> int | None:
        """Apply one Adam step; returns the post-update step index, or
        None when the gradients are rejected as non-finite."""
        if not all(np.all(np.isfinite(g)) for g in grads.values()):
            with self._lock:
                self.rejected += 1
            return None
        with self._lock:
            nets.adam_step(self.params, grads, self.adam,
                           lr=self.config.lr, eps=self.config.adam_eps,
                           weight_decay=self.config.weight_decay)
            return self.adam.step


def apply_gradients(store: GlobalStore, grads: dict) -> int | None:
    return store.apply_gradients(grads)


class StepBudget:
    """Thread-safe env-step counter over model-free workers."""

    def __init__(self, limit: int):
        self._lock = threading.Lock()
        self.limit = limit
        self.count = 0

    def consume(self) -> bool:
        with self._lock:
            if self.count >= self.limit:
                return False
            self.count += 1
            return True

    def exhausted(self) -> bool:
        with self._lock:
            return self.count >= self.limit


def _opponent_fn(config: TrainConfig, rng: random.Random):
    if config.opponent == "static":
        return lambda state: static_policy()
    return lambda state: rule_based_policy(state, 1, rng.randrange(1 << 30))


def _sample_action(probs: np.ndarray, rng: random.Random) -> Action:
    return Action(rng.choices(range(6), weights=probs)[0])


OUTCOME_NAMES = {Outcome.AGENT0_WINS: "Win", Outcome.AGENT1_WINS: "Loss",
                 Outcome.TIE: "Tie"}


class WorkerRuntime:
    """Shared context handed to every worker."""

    def __init__(self, store: GlobalStore, config: TrainConfig,
                 budget: StepBudget, stop: threading.Event,
                 record_sink, start_time: float, deterministic: bool):
        self.store = store
        self.config = config
        self.budget = budget
        self.stop = stop
        self.record_sink = record_sink
        self.start_time = start_time
        self.deterministic = deterministic
        self.errors: list[BaseException] = []
        self.suicides = 0
        self._lock = threading.Lock()

    def clock(self) -> float:
        return 0.0 if self.deterministic else time.time() - self.start_time

    def note_suicide(self, is_demo: bool) -> None:
        if not is_demo:
            with self._lock:
                self.suicides += 1


def _run_worker(rt: WorkerRuntime, worker_id: int, is_demo: bool) -> None:
    config = rt.config
    arch = config.make_arch()
    rng = random.Random(config.seed * 2654435761 + worker_id + 1)
    model = ActorCritic(arch, rt.store.snapshot())
    weights = LossWeights(imitation=config.lambda_imitation if is_demo else 0.0)
    opponent = _opponent_fn(config, rng)

    while not rt.stop.is_set():
        state = generate_board(rng.randrange(1 << 30), config.board_size, config.board)
        ep_len = 0
        ep_reward = 0.0
        done = False
        while not done:
            segment = TrajectorySegment(
                demonstrator_onehots=[] if is_demo else None)
            while len(segment) < config.t_max and not done:
                obs = encode_observation(state, 0)
                probs, value = model.forward(obs)
                if is_demo:
                    result = plan(state, 0, config.planner, rng.randrange(1 << 30),
                                  net=model if config.planner.rollout_policy == "network" else None)
                    action = result.action
                    onehot = np.zeros(6)
                    onehot[int(action)] = 1.0
                    segment.demonstrator_onehots.append(onehot)
                else:
                    action = _sample_action(probs, rng)
                res = step(state, (action, opponent(state)))
                segment.observations.append(obs)
                segment.actions.append(int(action))
                segment.rewards.append(res.rewards[0])
                segment.values.append(value)
                segment.policies.append(probs)
                state = res.next
                done = res.done
                ep_len += 1
                ep_reward += res.rewards[0]
                if not is_demo and not rt.budget.consume():
                    rt.stop.set()
            segment.terminal = done
            if not done:
                segment.bootstrap_value = model.value(encode_observation(state, 0))
            compute_returns_and_advantages(segment, config.gamma)
            _, grads = nets.backward(model.params, arch, segment, weights)
            grads, _ = nets.clip_gradients(grads, config.clip_norm)
            if rt.store.apply_gradients(grads) is not None:
                model.sync(rt.store.snapshot())
            if rt.stop.is_set() and not done:
                return
        suicide = state.last_death_cause[0] == DeathCause.OWN_BOMB
        if suicide:
            rt.note_suicide(is_demo)
        rt.record_sink(EpisodeRecord(
            worker_id=worker_id, is_demonstrator=is_demo,
            outcome=OUTCOME_NAMES[state.terminal], reward=ep_reward,
            length=ep_len, suicide=suicide, wallclock_s=rt.clock(),
            global_step=rt.store.step, env_steps=rt.budget.count))


def run_actor_worker(rt: WorkerRuntime, worker_id: int) -> None:
    try:
        _run_worker(rt, worker_id, is_demo=False)
    except BaseException as exc:  # propagate to the coordinator
        rt.errors.append(exc)
        rt.stop.set()


def run_demonstrator_worker(rt: WorkerRuntime, worker_id: int) -> None:
    try:
        _run_worker(rt, worker_id, is_demo=True)
    except BaseException as exc:
        rt.errors.append(exc)
        rt.stop.set()


# ---------------------------------------------------------------------------
# Evaluation

def evaluate(params: dict, arch: NetworkArch, opponent: str, n_episodes: int,
             seed: int, board_size: int = 8,
             board: BoardDensity | None = None) -> dict:
    """Greedy-policy evaluation on fresh randomized boards."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be >= 1")
    board = board or BoardDensity()
    model = ActorCritic(arch, params)
    rng = random.Random(seed * 2654435761 + 97)
    wins = ties = losses = suicides = 0
    total_reward = 0.0
    total_len = 0
    for _ in range(n_episodes):
        state = generate_board(rng.randrange(1 << 30), board_size, board)
        opp = (lambda s: static_policy()) if opponent == "static" \
            else (lambda s: rule_based_policy(s, 1, rng.randrange(1 << 30)))
        done = False
        while not done:
            probs, _ = model.forward(encode_observation(state, 0))
            action = Action(int(np.argmax(probs)))
            res = step(state, (action, opp(state)))
            state = res.next
            done = res.done
            total_len += 1
        total_reward += res.rewards[0]
        if state.terminal == Outcome.AGENT0_WINS:
            wins += 1
        elif state.terminal == Outcome.AGENT1_WINS:
            losses += 1
        else:
            ties += 1
        if state.last_death_cause[0] == DeathCause.OWN_BOMB:
            suicides += 1
    n = n_episodes
    return {
        "win_rate": wins / n, "tie_rate": ties / n, "loss_rate": losses / n,
        "suicide_rate": suicides / n, "mean_reward": total_reward / n,
        "mean_length": total_len / n,
    }


# ---------------------------------------------------------------------------
# Training coordinator

METRICS_HEADER = ["wallclock_s", "global_step", "env_steps", "worker_id",
                  "is_demo", "outcome", "reward", "ep_len", "suicide"]
EVAL_HEADER = ["env_steps", "win_rate", "tie_rate", "loss_rate",
               "suicide_rate", "mean_reward"]


class _CsvSink:
    def __init__(self, path: Path, header: list[str]):
        self._lock = threading.Lock()
        self._fh = open(path, "w", newline="")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(header)
        self._fh.flush()

    def write(self, row: list) -> None:
        with self._lock:
            self._writer.writerow(row)
            self._fh.flush()

    def close(self) -> None:
        self._fh.close()


def _record_row(rec: EpisodeRecord) -> list:
    return [f"{rec.wallclock_s:.3f}", rec.global_step, rec.env_steps,
            rec.worker_id, int(rec.is_demonstrator), rec.outcome,
            f"{rec.reward:.1f}", rec.length, int(rec.suicide)]


def train(config: TrainConfig, out_dir) -> dict:
    """Run a full training session; writes echoed config, metrics CSV,
    eval CSV and checkpoints into out_dir. Returns a summary dict."""
    from .config import config_to_kv  # local import to avoid a cycle

    config.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config_to_kv(config))

    arch = config.make_arch()
    params = nets.init_params(arch, seed=config.seed)
    store = GlobalStore(params, config)
    budget = StepBudget(config.total_env_steps)
    stop = threading.Event()
    deterministic = config.n_workers == 1

    metrics = _CsvSink(out / "metrics.csv", METRICS_HEADER)
    evals = _CsvSink(out / "eval.csv", EVAL_HEADER)
    records: list[EpisodeRecord] = []
    rec_lock = threading.Lock()

    def sink(rec: EpisodeRecord) -> None:
        with rec_lock:
            records.append(rec)
        metrics.write(_record_row(rec))

    rt = WorkerRuntime(store, config, budget, stop, sink, time.time(), deterministic)

    def run_eval(at_steps: int, idx: int) -> None:
        stats = evaluate(store.snapshot(), arch, config.opponent,
                         config.eval_episodes, seed=config.seed * 1000003 + idx,
                         board_size=config.board_size, board=config.board)
        evals.write([at_steps] + [f"{stats[k]:.4f}" for k in EVAL_HEADER[1:]])
        nets.save_checkpoint(out / f"checkpoint_{at_steps}.bin",
                             store.snapshot(), arch, store.step)

    try:
        if deterministic:
            # Inline single-worker mode: fully reproducible, evals run at
            # deterministic env-step thresholds between episodes.
            next_eval = config.eval_every
            eval_idx = 0
            demo = config.k_demonstrators > 0

            def sink_and_eval(rec: EpisodeRecord) -> None:
                nonlocal next_eval, eval_idx
                sink(rec)
                while budget.count >= next_eval and next_eval <= config.total_env_steps:
                    run_eval(next_eval, eval_idx)
                    eval_idx += 1
                    next_eval += config.eval_every

            rt.record_sink = sink_and_eval
            if demo:
                run_demonstrator_worker(rt, 0)
            else:
                run_actor_worker(rt, 0)
            while next_eval <= config.total_env_steps:
                run_eval(next_eval, eval_idx)
                eval_idx += 1
                next_eval += config.eval_every
        else:
            threads = []
            for wid in range(config.n_workers):
                target = run_demonstrator_worker if wid < config.k_demonstrators \
                    else run_actor_worker
                t = threading.Thread(target=target, args=(rt, wid), daemon=True)
                threads.append(t)
                t.start()
            next_eval = config.eval_every
            eval_idx = 0
            while not stop.is_set():
                time.sleep(0.2)
                while budget.count >= next_eval and next_eval <= config.total_env_steps:
                    run_eval(next_eval, eval_idx)
                    eval_idx += 1
                    next_eval += config.eval_every
                if rt.errors:
                    break
            for t in threads:
                t.join(timeout=600)
            while next_eval <= config.total_env_steps and not rt.errors:
                run_eval(next_eval, eval_idx)
                eval_idx += 1
                next_eval += config.eval_every
        nets.save_checkpoint(out / "checkpoint_final.bin", store.snapshot(),
                             arch, store.step)
        summary = {
            "label": config.label,
            "env_steps": budget.count,
            "global_step": store.step,
            "rejected_gradients": store.rejected,
            "episodes": len(records),
            "model_free_suicides": sum(
                1 for r in records if r.suicide and not r.is_demonstrator),
        }
        (out / "summary.txt").write_text(
            "".join(f"{k}={v}\n" for k, v in summary.items()))
        if rt.errors:
            raise TrainError(f"worker failed: {rt.errors[0]!r}") from rt.errors[0]
        return summary
    finally:
        metrics.close()
        evals.close()
