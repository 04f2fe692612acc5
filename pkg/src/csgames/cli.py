"""Command-line front end: evaluate, simulate, best-respond, verify, solve,
discretize, transform, and correlated-sequence over JSON documents.

Exit codes: 0 success (and verification passed), 1 a verification or solve
target was not certified (outputs are still written), 2 input could not be
parsed, 3 input parsed but failed validation or a precondition, 4 the solver
failed numerically.

Documents are JSON with explicit shapes; floats are serialized with Python's
shortest round-trip representation, so write-read-write is byte-stable.  All
randomness derives from --seed (default 0).  Reports are byte-identical for
identical inputs and seed, except for the timing block.
"""

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .best_response import constrained_best_response
from .discretization import build_partition, error_bound, resolution_for, surrogate_game
from .equilibrium import (
    SearchConfig,
    correlated_limit_sequence,
    search_equilibrium,
    verify_approx_equilibrium,
    verify_statewise_equilibrium,
    verify_weak_correlated,
)
from .evaluation import evaluate_correlated, evaluate_markov, evaluate_profile, induced_mdp, simulate
from .game import (
    ContinuousGameSpec,
    CorrelatedStrategy,
    FiniteCSG,
    MarkovStrategy,
    StationaryProfile,
    product_strategy,
    validate_game,
    validate_spec,
)
from .transform import wessels_transform

GAME_SCHEMA = "csgames-game-v1"
STRATEGY_SCHEMA = "csgames-strategy-v1"
CERTIFICATE_SCHEMA = "csgames-certificate-v1"
REPORT_SCHEMA = "csgames-report-v1"

EXIT_OK = 0
EXIT_CERTIFIED_FAIL = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_SOLVER = 4


class ParseError(Exception):
    pass


class ValidationFailure(Exception):
    pass


def _dump(payload):
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write(path, payload):
    Path(path).write_text(_dump(payload))


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc


def _field(doc, key, path):
    if key not in doc:
        raise ParseError(f"{path}: missing field {key!r}")
    return doc[key]


def _array(doc, key, path):
    try:
        return np.array(_field(doc, key, path), dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: field {key!r} is not a numeric array: {exc}") from exc


def game_to_payload(game, name=None, extra=None):
    payload = {
        "schema": GAME_SCHEMA,
        "kind": "finite",
        "n_actions": list(game.n_actions),
        "n_states": game.n_states,
        "n_constraint_layers": game.n_layers,
        "discount": game.discount,
        "cost_bound": game.cost_bound,
        "costs": game.costs.tolist(),
        "transitions": game.transitions.tolist(),
        "initial": game.initial.tolist(),
        "constraint_bounds": game.constraint_bounds.tolist(),
    }
    if name:
        payload["name"] = name
    if extra:
        payload.update(extra)
    return payload


def spec_to_payload(spec, name=None):
    payload = {
        "schema": GAME_SCHEMA,
        "kind": "grid",
        "n_actions": list(spec.n_actions),
        "n_points": spec.n_points,
        "n_constraint_layers": spec.n_layers,
        "discount": spec.discount,
        "cost_bound": spec.cost_bound,
        "points": spec.points.tolist(),
        "weights": spec.weights.tolist(),
        "density": spec.density.tolist(),
        "costs": spec.costs.tolist(),
        "initial": spec.initial.tolist(),
        "constraint_bounds": spec.constraint_bounds.tolist(),
    }
    if name:
        payload["name"] = name
    return payload


def _check_schema(doc, schema, path):
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    if doc.get("schema") != schema:
        raise ParseError(f"{path}: expected schema {schema!r}, found {doc.get('schema')!r}")


def load_game(path):
    """Parse and validate a finite game document; parse errors and validation
    errors are distinguished for the exit-code contract."""
    doc = _load_json(path)
    _check_schema(doc, GAME_SCHEMA, path)
    if doc.get("kind") != "finite":
        raise ParseError(f"{path}: expected kind 'finite', found {doc.get('kind')!r}")
    try:
        game = FiniteCSG(
            n_actions=tuple(_field(doc, "n_actions", path)),
            costs=_array(doc, "costs", path),
            transitions=_array(doc, "transitions", path),
            discount=float(_field(doc, "discount", path)),
            initial=_array(doc, "initial", path),
            constraint_bounds=_array(doc, "constraint_bounds", path),
            cost_bound=float(_field(doc, "cost_bound", path)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    report = validate_game(game)
    if not report.ok:
        raise ValidationFailure(f"{path}:\n{report}")
    return game, doc


def load_spec(path):
    doc = _load_json(path)
    _check_schema(doc, GAME_SCHEMA, path)
    if doc.get("kind") != "grid":
        raise ParseError(f"{path}: expected kind 'grid', found {doc.get('kind')!r}")
    try:
        spec = ContinuousGameSpec(
            n_actions=tuple(_field(doc, "n_actions", path)),
            points=_array(doc, "points", path),
            weights=_array(doc, "weights", path),
            density=_array(doc, "density", path),
            costs=_array(doc, "costs", path),
            discount=float(_field(doc, "discount", path)),
            initial=_array(doc, "initial", path),
            constraint_bounds=_array(doc, "constraint_bounds", path),
            cost_bound=float(_field(doc, "cost_bound", path)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    report = validate_spec(spec)
    if not report.ok:
        raise ValidationFailure(f"{path}:\n{report}")
    return spec, doc


def strategy_to_payload(strategy):
    if isinstance(strategy, StationaryProfile):
        return {
            "schema": STRATEGY_SCHEMA,
            "class": "stationary",
            "rows": [r.tolist() for r in strategy.rows],
        }
    if isinstance(strategy, CorrelatedStrategy):
        return {
            "schema": STRATEGY_SCHEMA,
            "class": "correlated",
            "n_actions": list(strategy.n_actions),
            "table": strategy.table.tolist(),
        }
    if isinstance(strategy, MarkovStrategy):
        return {
            "schema": STRATEGY_SCHEMA,
            "class": "markov",
            "player": strategy.player,
            "head": [h.tolist() for h in strategy.head],
            "tail": strategy.tail.tolist(),
        }
    raise TypeError(f"cannot serialize strategy of type {type(strategy)!r}")


def load_strategy(path):
    """Parse a strategy document; returns the tagged object."""
    doc = _load_json(path)
    _check_schema(doc, STRATEGY_SCHEMA, path)
    cls = doc.get("class")
    try:
        if cls == "stationary":
            rows = tuple(np.array(r, dtype=float) for r in _field(doc, "rows", path))
            return StationaryProfile(rows)
        if cls == "correlated":
            return CorrelatedStrategy(
                tuple(_field(doc, "n_actions", path)),
                _array(doc, "table", path),
            )
        if cls == "markov":
            return MarkovStrategy(
                player=int(_field(doc, "player", path)),
                head=tuple(np.array(h, dtype=float) for h in _field(doc, "head", path)),
                tail=_array(doc, "tail", path),
            )
    except ParseError:
        raise
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}") from exc
    raise ParseError(f"{path}: unknown strategy class {cls!r}")


def _require_class(strategy, wanted, path):
    names = {StationaryProfile: "stationary", CorrelatedStrategy: "correlated",
             MarkovStrategy: "markov"}
    actual = names.get(type(strategy), "unknown")
    if actual != wanted:
        raise ValidationFailure(
            f"{path}: this command needs a {wanted!r} strategy, found {actual!r}")
    return strategy


def certificate_to_payload(cert):
    players = []
    for pc in cert.players:
        players.append({
            "objective": pc.objective,
            "constraint_values": list(pc.constraint_values),
            "feasibility_excess": pc.feasibility_excess,
            "best_response_value": pc.best_response_value,
            "best_response_gap": pc.best_response_gap,
            "vacuous": pc.vacuous,
        })
    return {
        "schema": CERTIFICATE_SCHEMA,
        "concept": cert.concept,
        "epsilon": cert.epsilon,
        "threshold": cert.threshold,
        "passed": cert.passed,
        "players": players,
    }


def statewise_to_payload(cert):
    return {
        "schema": CERTIFICATE_SCHEMA,
        "concept": "statewise",
        "epsilon": cert.epsilon,
        "threshold": cert.threshold,
        "passed": cert.passed,
        "gaps": cert.gaps.tolist(),
    }


class _Report:
    """Deterministic run report; the timing block is excluded from the
    determinism contract."""

    def __init__(self, command, inputs, seed=None):
        self.started = time.perf_counter()
        self.payload = {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "command": command,
            "inputs": {str(p): _digest(p) for p in inputs},
        }
        if seed is not None:
            self.payload["seed"] = int(seed)

    def finish(self, out_dir, results):
        self.payload["results"] = results
        self.payload["timing"] = {"seconds": time.perf_counter() - self.started}
        path = Path(out_dir) / f"{self.payload['command']}.report.json"
        _write(path, self.payload)
        return path


def _out_dir(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_evaluate(args):
    game, _ = load_game(args.game)
    strategy = load_strategy(args.strategy)
    report = _Report("evaluate", [args.game, args.strategy])
    if isinstance(strategy, StationaryProfile):
        cv = evaluate_profile(game, strategy)
    elif isinstance(strategy, CorrelatedStrategy):
        cv = evaluate_correlated(game, strategy)
    else:
        if game.n_players != 1:
            raise ValidationFailure(
                "a markov strategy alone determines play only in a one-player game")
        cv = evaluate_markov(game, strategy.player, [], strategy)
    out = _out_dir(args)
    path = report.finish(out, {
        "values": cv.J.tolist(),
        "values_per_state": cv.Jx.tolist(),
    })
    for i in range(game.n_players):
        print(f"player {i}: " + "  ".join(f"J{l}={cv.J[i, l]:.12g}"
                                          for l in range(game.n_layers + 1)))
    print(f"report: {path}")
    return EXIT_OK


def cmd_simulate(args):
    game, _ = load_game(args.game)
    strategy = load_strategy(args.strategy)
    if isinstance(strategy, StationaryProfile):
        psi = product_strategy(strategy)
    else:
        psi = _require_class(strategy, "correlated", args.strategy)
    report = _Report("simulate", [args.game, args.strategy], seed=args.seed)
    sim = simulate(game, psi, n_trajectories=args.trajectories,
                   tol=args.tol, seed=args.seed)
    out = _out_dir(args)
    path = report.finish(out, {
        "estimates": sim.estimates.tolist(),
        "confidence_radii": sim.radii.tolist(),
        "trajectories": sim.n_trajectories,
        "horizon": sim.horizon,
        "truncation_bias_bound": sim.bias_bound,
    })
    for i in range(game.n_players):
        line = "  ".join(
            f"J{l}={sim.estimates[i, l]:.6g}+-{sim.radii[i, l]:.2g}"
            for l in range(game.n_layers + 1))
        print(f"player {i}: {line}")
    print(f"horizon {sim.horizon}, truncation bias <= {sim.bias_bound:.3g}")
    print(f"report: {path}")
    return EXIT_OK


def cmd_best_respond(args):
    game, _ = load_game(args.game)
    profile = _require_class(load_strategy(args.strategy), "stationary", args.strategy)
    if not 0 <= args.player < game.n_players:
        raise ValidationFailure(f"player {args.player} out of range")
    if profile.n_actions != game.n_actions or profile.n_states != game.n_states:
        raise ValidationFailure("strategy does not match the game dimensions")
    report = _Report("best-respond", [args.game, args.strategy])
    others = [r for j, r in enumerate(profile.rows) if j != args.player]
    result = constrained_best_response(induced_mdp(game, args.player, others))
    out = _out_dir(args)
    results = {"status": result.status}
    if result.feasible:
        _write(out / "best-respond.strategy.json", {
            "schema": STRATEGY_SCHEMA,
            "class": "stationary",
            "rows": [result.strategy.tolist()],
        })
        results.update({
            "value": result.value,
            "layer_values": result.layer_values.tolist(),
            "residuals": result.residuals,
            "strategy_file": "best-respond.strategy.json",
        })
        print(f"best response value {result.value:.12g} "
              f"(layers {np.array2string(result.layer_values, precision=6)})")
    else:
        print("no strategy meets the budgets against this profile")
    path = report.finish(out, results)
    print(f"report: {path}")
    return EXIT_OK if result.feasible else EXIT_CERTIFIED_FAIL


def cmd_verify(args):
    game, _ = load_game(args.game)
    strategy = load_strategy(args.strategy)
    report = _Report("verify", [args.game, args.strategy])
    out = _out_dir(args)
    if args.concept == "weak-correlated":
        psi = _require_class(strategy, "correlated", args.strategy)
        cert = verify_weak_correlated(game, psi, tol=args.tol)
        payload = certificate_to_payload(cert)
    elif args.concept == "statewise":
        profile = _require_class(strategy, "stationary", args.strategy)
        cert = verify_statewise_equilibrium(game, profile, args.epsilon)
        payload = statewise_to_payload(cert)
    else:
        profile = _require_class(strategy, "stationary", args.strategy)
        cert = verify_approx_equilibrium(game, profile, args.epsilon)
        payload = certificate_to_payload(cert)
    _write(out / "verify.certificate.json", payload)
    path = report.finish(out, {
        "concept": payload["concept"],
        "epsilon": cert.epsilon,
        "threshold": cert.threshold,
        "passed": cert.passed,
        "certificate_file": "verify.certificate.json",
    })
    verdict = "PASS" if cert.passed else "FAIL"
    print(f"{verdict} {payload['concept']}: certified epsilon {cert.epsilon:.6g} "
          f"(threshold {cert.threshold:.6g})")
    print(f"report: {path}")
    return EXIT_OK if cert.passed else EXIT_CERTIFIED_FAIL


def cmd_solve(args):
    game, _ = load_game(args.game)
    report = _Report("solve", [args.game], seed=args.seed)
    config = SearchConfig(restarts=args.restarts, target_epsilon=args.target_eps,
                          seed=args.seed)
    result = search_equilibrium(game, config)
    out = _out_dir(args)
    _write(out / "solve.strategy.json", strategy_to_payload(result.profile))
    _write(out / "solve.certificate.json", certificate_to_payload(result.certificate))
    path = report.finish(out, {
        "epsilon": result.certificate.epsilon,
        "target": args.target_eps,
        "achieved": result.converged,
        "iterations": result.iterations,
        "restarts_used": result.restarts_used,
        "skipped_updates": len(result.skipped),
        "strategy_file": "solve.strategy.json",
        "certificate_file": "solve.certificate.json",
    })
    verdict = "reached" if result.converged else "missed"
    print(f"certified epsilon {result.certificate.epsilon:.6g}; target "
          f"{args.target_eps:.6g} {verdict} after {result.iterations} iterations")
    print(f"report: {path}")
    return EXIT_OK if result.converged else EXIT_CERTIFIED_FAIL


def cmd_discretize(args):
    spec, _ = load_spec(args.spec)
    if args.gamma is not None:
        resolution = args.gamma
    else:
        resolution = resolution_for(args.epsilon, spec.discount, spec.cost_bound)
    if resolution <= 0.0:
        raise ValidationFailure("resolution must be positive")
    report = _Report("discretize", [args.spec])
    disc = surrogate_game(spec, build_partition(spec, resolution))
    out = _out_dir(args)
    _write(out / "discretize.game.json", game_to_payload(
        disc.game, extra={"certified_error": disc.certified_error}))
    _write(out / "discretize.partition.json", {
        "schema": "csgames-partition-v1",
        "resolution": disc.partition.resolution,
        "certified_error": disc.certified_error,
        "cells": [c.tolist() for c in disc.partition.cells],
        "representatives": disc.partition.representatives.tolist(),
    })
    path = report.finish(out, {
        "resolution": disc.partition.resolution,
        "certified_error": disc.certified_error,
        "n_cells": disc.partition.n_cells,
        "game_file": "discretize.game.json",
        "partition_file": "discretize.partition.json",
    })
    print(f"{disc.partition.n_cells} cells at resolution {resolution:.6g}; "
          f"certified error {disc.certified_error:.6g}")
    print(f"report: {path}")
    return EXIT_OK


def cmd_transform(args):
    game, doc = load_game(args.game)
    block = doc.get("transform")
    if not isinstance(block, dict) or "omega" not in block or "beta" not in block:
        raise ValidationFailure(
            f"{args.game}: transform needs a 'transform' block with 'omega' and 'beta'")
    try:
        omega = np.array(block["omega"], dtype=float)
        beta = float(block["beta"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{args.game}: malformed transform block: {exc}") from exc
    report = _Report("transform", [args.game])
    try:
        wg = wessels_transform(game, omega, beta)
    except ValueError as exc:
        raise ValidationFailure(str(exc)) from exc
    out = _out_dir(args)
    _write(out / "transform.game.json", game_to_payload(wg.game, extra={
        "transform_of": str(args.game),
        "eta_omega": wg.eta_omega,
        "c0": wg.c0,
        "value_scale": wg.value_scale,
    }))
    path = report.finish(out, {
        "eta_omega": wg.eta_omega,
        "c0": wg.c0,
        "beta": wg.beta,
        "discount": wg.game.discount,
        "value_scale": wg.value_scale,
        "game_file": "transform.game.json",
    })
    print(f"bounded game with discount {wg.game.discount:.6g}, cost bound {wg.c0:.6g}, "
          f"value scale {wg.value_scale:.6g}")
    print(f"report: {path}")
    return EXIT_OK


def cmd_correlated_sequence(args):
    game, _ = load_game(args.game)
    if args.eps0 <= 0:
        raise ValidationFailure("--eps0 must be positive")
    report = _Report("correlated-sequence", [args.game], seed=args.seed)
    config = SearchConfig(seed=args.seed)
    seq = correlated_limit_sequence(game, args.eps0, args.n, config)
    out = _out_dir(args)
    levels = []
    for level in seq.levels:
        levels.append({
            "n": level.index,
            "epsilon_target": level.epsilon_target,
            "resolution": level.resolution,
            "certified_epsilon": level.certificate.epsilon,
            "passed": level.certificate.passed,
        })
    results = {"levels": levels, "completed": seq.completed}
    if seq.levels:
        _write(out / "correlated-sequence.strategy.json",
               strategy_to_payload(seq.levels[-1].correlated))
        _write(out / "correlated-sequence.certificate.json",
               certificate_to_payload(seq.final_certificate))
        results.update({
            "final_epsilon": seq.final_certificate.epsilon,
            "final_passed": seq.final_certificate.passed,
            "strategy_file": "correlated-sequence.strategy.json",
            "certificate_file": "correlated-sequence.certificate.json",
        })
    path = report.finish(out, results)
    for row in levels:
        print(f"n={row['n']}: target {row['epsilon_target']:.6g}, certified "
              f"{row['certified_epsilon']:.6g}, resolution {row['resolution']:.6g}")
    ok = seq.completed and seq.final_certificate is not None and seq.final_certificate.passed
    if seq.levels:
        print(f"final weak-correlated epsilon {seq.final_certificate.epsilon:.6g}")
    print(f"report: {path}")
    return EXIT_OK if ok else EXIT_CERTIFIED_FAIL


def build_parser():
    parser = argparse.ArgumentParser(
        prog="csgames",
        description="Constrained discounted stochastic games: evaluate, verify, "
                    "solve, discretize, transform.",
    )
    parser.add_argument("--version", action="version", version=f"csgames {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_out(p):
        p.add_argument("--out-dir", default=".", help="directory for outputs (default: .)")

    p = sub.add_parser("evaluate", help="exact discounted costs of a strategy")
    p.add_argument("game")
    p.add_argument("strategy")
    add_out(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of discounted costs")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trajectories", type=int, default=10000)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="truncation bias target (sets the horizon)")
    add_out(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("best-respond", help="constrained best response of one player")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--player", type=int, required=True)
    add_out(p)
    p.set_defaults(func=cmd_best_respond)

    p = sub.add_parser("verify", help="certify a strategy as an equilibrium")
    p.add_argument("game")
    p.add_argument("strategy")
    p.add_argument("--concept", choices=["approx", "statewise", "weak-correlated"],
                   default="approx")
    p.add_argument("--epsilon", type=float, default=0.0,
                   help="accuracy to certify (approx/statewise)")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="numerical slack (weak-correlated)")
    add_out(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("solve", help="search for an approximate equilibrium")
    p.add_argument("game")
    p.add_argument("--target-eps", type=float, default=1e-8)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("discretize", help="partition a gridded game and emit the surrogate")
    p.add_argument("spec")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--gamma", type=float, help="partition resolution")
    group.add_argument("--epsilon", type=float,
                       help="target certified error (sets the resolution)")
    add_out(p)
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("transform", help="rescale weighted costs into a bounded game")
    p.add_argument("game", help="game document with a 'transform' block (omega, beta)")
    add_out(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("correlated-sequence",
                       help="halving-target equilibrium sequence with a final "
                            "weak-correlated certificate")
    p.add_argument("game")
    p.add_argument("--eps0", type=float, required=True)
    p.add_argument("--n", type=int, required=True, help="last level index")
    p.add_argument("--seed", type=int, default=0)
    add_out(p)
    p.set_defaults(func=cmd_correlated_sequence)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationFailure as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
