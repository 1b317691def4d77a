"""Command-line entry points: batch ``run`` and interactive ``repl``."""

from __future__ import annotations

import argparse
import cmd
import sys
from pathlib import Path
from typing import TextIO

from . import __version__
from .scenario import ScenarioError, load_scenario
from .simnet import World, as_name
from .telemetry import EventKind, EventRecord, summarize, write_log
from .wire import WireError

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_SCENARIO = 2


def cmd_run(
    scenario_path: str | Path,
    seed: int | None = None,
    duration_ms: int | None = None,
    log_path: str | Path | None = None,
    metrics_path: str | Path | None = None,
    out: TextIO | None = None,
    err: TextIO | None = None,
) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_SCENARIO
    except OSError as exc:
        print(f"error: cannot read {scenario_path}: {exc.strerror or exc}", file=err)
        return EXIT_SCENARIO

    stem = Path(scenario_path).stem
    log_path = Path(log_path) if log_path else Path(f"{stem}.log")
    metrics_path = Path(metrics_path) if metrics_path else Path(f"{stem}.metrics")

    world = scenario.build(seed)
    log, metrics = world.run(duration_ms or scenario.duration_ms)
    write_log(log, log_path)
    metrics_path.write_text(metrics.dump(), encoding="utf-8")
    out.write(metrics.dump())
    return EXIT_OK


def format_console(e: EventRecord) -> str:
    return f"node {e.node.number}| {e.detail}"


class MeshRepl(cmd.Cmd):
    """Serial-console view of a paused simulation.

    Commands: step [n], send <node> <line>, show <node> send|sended|led,
    metrics, quit.
    """

    intro = "floodmesh repl; type help for commands"
    prompt = "mesh> "

    def __init__(self, world: World, stdin: TextIO | None = None, stdout: TextIO | None = None):
        super().__init__(stdin=stdin, stdout=stdout)
        if stdin is not None:
            self.use_rawinput = False
        self.world = world

    def _print(self, text: str) -> None:
        self.stdout.write(text + "\n")

    def _lookup(self, token: str):
        try:
            name = as_name(token)
        except WireError:
            return None
        return name if name in self.world.nodes else None

    def emptyline(self) -> bool:
        return False

    def default(self, line: str) -> bool:
        self._print(f"unknown command: {line.split()[0]}")
        return False

    def do_step(self, arg: str) -> bool:
        """step [n]: advance n rounds (default 1)."""
        arg = arg.strip()
        if arg and not arg.isdigit():
            self._print(f"step expects a round count, got {arg!r}")
            return False
        for _ in range(int(arg) if arg else 1):
            for e in self.world.step():
                if e.kind is EventKind.CONSOLE:
                    self._print(format_console(e))
        self._print(f"t={self.world.clock_ms} ms, round {self.world.rounds}")
        return False

    def do_send(self, arg: str) -> bool:
        """send <node> <serial-line>: type a line on a node's console."""
        parts = arg.strip().split(None, 1)
        if len(parts) != 2:
            self._print("usage: send <node> <serial-line>")
            return False
        name = self._lookup(parts[0])
        if name is None:
            self._print(f"unknown node: {parts[0]}")
            return False
        self.world.inject_serial(name, parts[1])
        return False

    def do_show(self, arg: str) -> bool:
        """show <node> send|sended|led"""
        parts = arg.split()
        if len(parts) != 2 or parts[1] not in ("send", "sended", "led"):
            self._print("usage: show <node> send|sended|led")
            return False
        name = self._lookup(parts[0])
        if name is None:
            self._print(f"unknown node: {parts[0]}")
            return False
        node = self.world.node(name)
        if parts[1] == "led":
            led = node.led
            flags = (("red", led.red), ("yellow", led.yellow), ("green", led.green))
            self._print(" ".join(f"{c}={'on' if on else 'off'}" for c, on in flags))
            return False
        lines, count = (node.to_send if parts[1] == "send" else node.sended).show_all()
        for line in lines:
            self._print(line)
        self._print(f"[Count: {count}]")
        return False

    def do_metrics(self, arg: str) -> bool:
        """metrics: summary of the log so far."""
        self.stdout.write(summarize(self.world.log).dump())
        return False

    def do_quit(self, arg: str) -> bool:
        """quit: leave the session."""
        return True

    do_EOF = do_quit


def cmd_repl(
    scenario_path: str | Path, stdin: TextIO | None = None, stdout: TextIO | None = None,
    err: TextIO | None = None,
) -> int:
    err = err or sys.stderr
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_SCENARIO
    except OSError as exc:
        print(f"error: cannot read {scenario_path}: {exc.strerror or exc}", file=err)
        return EXIT_SCENARIO
    MeshRepl(scenario.build(), stdin=stdin, stdout=stdout).cmdloop()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="floodmesh", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario to completion")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int)
    run.add_argument("--duration", type=int, metavar="MS")
    run.add_argument("--log", metavar="PATH", help="event log output (default <scenario>.log)")
    run.add_argument("--metrics", metavar="PATH", help="metrics output (default <scenario>.metrics)")

    repl = sub.add_parser("repl", help="step a scenario interactively")
    repl.add_argument("scenario")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            if args.duration is not None and args.duration <= 0:
                print("error: --duration must be positive", file=sys.stderr)
                return EXIT_SCENARIO
            return cmd_run(args.scenario, args.seed, args.duration, args.log, args.metrics)
        return cmd_repl(args.scenario)
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
