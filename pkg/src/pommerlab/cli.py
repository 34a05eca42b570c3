"""Command-line entry point: train, eval, hazard, plan, replay.

Exit codes: 0 success, 1 usage error, 2 config/input error, 3 runtime
failure. All randomness is funneled through explicit --seed flags.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import engine, hazard, net as nets, trainer
from .config import ConfigError, apply_setting, kv_to_config
from .engine import Action, Bomb
from .planner import PlannerConfig, plan
from .trainer import TrainConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pommerlab")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="run a training session")
    t.add_argument("--config", help="key=value config file")
    t.add_argument("--out", required=True, help="run output directory")
    t.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config entry (repeatable)")

    e = sub.add_parser("eval", help="evaluate a checkpoint")
    e.add_argument("checkpoint")
    e.add_argument("--opponent", choices=["static", "rulebased"], default="static")
    e.add_argument("--episodes", type=int, default=100)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--board-size", type=int, default=None)

    h = sub.add_parser("hazard", help="suicide-hazard analysis")
    hs = h.add_subparsers(dest="hazard_cmd", required=True)
    hc = hs.add_parser("corridor")
    hc.add_argument("--length", type=int, default=10)
    hc.add_argument("--strength", type=int, default=10)
    hc.add_argument("--horizon", type=int, default=9)
    hb = hs.add_parser("board")
    hb.add_argument("--seed", type=int, required=True)
    hb.add_argument("--horizon", type=int, default=9)
    hb.add_argument("--size", type=int, default=8)
    hv = hs.add_parser("survival")
    hv.add_argument("--p", type=float, required=True)
    hv.add_argument("--b", type=int, required=True)

    pl = sub.add_parser("plan", help="single-position MCTS planning")
    pl.add_argument("board_file")
    pl.add_argument("--agent", type=int, default=0)
    pl.add_argument("--rollouts", type=int, default=75)
    pl.add_argument("--depth", type=int, default=24)
    pl.add_argument("--seed", type=int, default=0)

    r = sub.add_parser("replay", help="pretty-print a logged episode")
    r.add_argument("replay_file")
    return p


def cmd_train(args) -> int:
    config = TrainConfig()
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            print(f"error: config file not found: {path}", file=sys.stderr)
            return EXIT_CONFIG
        try:
            config = kv_to_config(path.read_text())
        except (ConfigError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    for item in args.set:
        if "=" not in item:
            print(f"error: --set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return EXIT_USAGE
        key, raw = item.split("=", 1)
        try:
            apply_setting(config, key, raw)
        except (ConfigError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        summary = trainer.train(config, args.out)
    except trainer.TrainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"label={summary['label']} env_steps={summary['env_steps']} "
          f"global_step={summary['global_step']} episodes={summary['episodes']}")
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.episodes < 1:
        print("error: --episodes must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        params, arch, _ = nets.load_checkpoint(args.checkpoint)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read checkpoint: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    board_size = args.board_size or arch.board_size
    stats = trainer.evaluate(params, arch, args.opponent, args.episodes,
                             args.seed, board_size=board_size)
    print(f"{stats['win_rate']:.4f},{stats['tie_rate']:.4f},"
          f"{stats['loss_rate']:.4f},{stats['suicide_rate']:.4f},"
          f"{stats['mean_reward']:.4f},{stats['mean_length']:.4f}")
    return EXIT_OK


def cmd_hazard(args) -> int:
    if args.hazard_cmd == "survival":
        try:
            print(f"{hazard.survival_after_bombs(args.p, args.b):.6f}")
        except engine.ContractViolation as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    try:
        if args.hazard_cmd == "corridor":
            state = hazard.corridor_scenario(args.length, args.strength)
            query = hazard.HazardQuery(state, 0, horizon=args.horizon)
        else:
            state = engine.generate_board(args.seed, args.size)
            agent = state.agents[0]
            state.bombs.append(Bomb(agent.pos, timer=args.horizon,
                                    blast_strength=agent.blast_strength, owner=0))
            agent.ammo -= 1
            query = hazard.HazardQuery(state, 0, horizon=args.horizon)
        result = hazard.survival_distribution(query)
    except (engine.ContractViolation, engine.BoardGenerationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    sys.stdout.write(hazard.heatmap_csv(result))
    print(f"suicide_probability={result.suicide_probability:.9f}")
    return EXIT_OK


def cmd_plan(args) -> int:
    try:
        state = engine.load_board(Path(args.board_file).read_text())
    except (OSError, ValueError, KeyError, IndexError) as exc:
        print(f"error: cannot parse board: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if state.terminal is not None:
        print("error: board is terminal", file=sys.stderr)
        return EXIT_CONFIG
    config = PlannerConfig(n_rollouts=args.rollouts, rollout_depth=args.depth)
    result = plan(state, args.agent, config, args.seed)
    print(f"action={result.action.name}")
    for a in Action:
        print(f"visits.{a.name}={result.visit_counts[a]}")
    return EXIT_OK


def cmd_replay(args) -> int:
    try:
        initial, actions = engine.load_replay(Path(args.replay_file).read_text())
    except (OSError, ValueError, KeyError, IndexError) as exc:
        print(f"error: cannot parse replay: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    state = initial
    print(f"tick {state.tick}")
    print(_render(state))
    for a0, a1 in actions:
        if state.terminal is not None:
            break
        res = engine.step(state, (a0, a1))
        state = res.next
        print(f"tick {state.tick}  actions {a0.name}/{a1.name}  "
              f"rewards {res.rewards[0]:+.0f}/{res.rewards[1]:+.0f}")
        print(_render(state))
    term = "running" if state.terminal is None else state.terminal.name
    print(f"terminal={term}")
    return EXIT_OK


def _render(state) -> str:
    grid = [list(engine.save_board(state).splitlines()[2 + r])
            for r in range(state.size)]
    for bomb in state.bombs:
        grid[bomb.pos[0]][bomb.pos[1]] = "o"
    for flame in state.flames:
        grid[flame.pos[0]][flame.pos[1]] = "*"
    for agent in state.agents:
        if agent.alive:
            grid[agent.pos[0]][agent.pos[1]] = str(agent.id)
    return "\n".join("".join(row) for row in grid)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    handlers = {"train": cmd_train, "eval": cmd_eval, "hazard": cmd_hazard,
                "plan": cmd_plan, "replay": cmd_replay}
    try:
        return handlers[args.command](args)
    except engine.ContractViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
