"""Command-line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 usage/parameter error,
3 dimension cap exceeded.
"""

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import alignment, cpt, dfs, linalg, momentum, resource, spin
from .errors import CapacityError, CptkitError
from .report import Report, to_jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAPACITY = 0, 1, 2, 3

SUITES = ("klein", "lemma1", "unitary-consistency", "antiunitary-demo", "momentum", "dfs", "alignment")
ALIGN_KEYS = {"q0", "N", "trials", "seed"}
DFS_KEYS = {"s", "massive", "sector", "message", "noise", "trials", "seed"}


class UsageError(CptkitError):
    pass


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_path: str | None = None
    format: str = "json"

    def validate(self, allowed):
        unknown = set(self.parameters) - set(allowed)
        if unknown:
            raise UsageError(f"unknown parameter(s) for {self.command}: {', '.join(sorted(unknown))}")
        if self.format not in ("json", "csv"):
            raise UsageError(f"unknown format {self.format!r}")
        return self


def _load_descriptor(path, allowed):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read descriptor {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("descriptor must be a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise UsageError(f"unknown descriptor key(s): {', '.join(sorted(unknown))}")
    return doc


def _parse_float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse number list {text!r}") from exc
    if not vals:
        raise UsageError("grid must be non-empty")
    return vals


def _parse_int_list(text):
    """"1,2,5" or "1-8" (inclusive range) or a mix."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if "-" in part:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
        except ValueError as exc:
            raise UsageError(f"cannot parse integer list {text!r}") from exc
    if not out:
        raise UsageError("grid must be non-empty")
    return out


def _space(args):
    spin2 = spin.parse_spin(args.spin)
    explicit = spin2 <= spin.EXPLICIT_SPIN2_CAP
    if getattr(args, "massless", False):
        return spin.massless_allowed_states(spin2, explicit=explicit)
    return spin.massive_spin_s_space(spin2, explicit=explicit)


def _phases(args, space, rng):
    choice = getattr(args, "phases", None) or "zero"
    if choice == "zero":
        return cpt.PhaseConvention()
    if choice == "random":
        return cpt.PhaseConvention.random_admissible(space, rng)
    try:
        doc = json.loads(Path(choice).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read phase file {choice}: {exc}") from exc
    return cpt.PhaseConvention.from_dict(doc)


def _emit(text, args):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_report(report, args):
    _emit(report.to_json(), args)
    if not report.passed:
        print("failed checks: " + ", ".join(report.failures()), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# -- commands -----------------------------------------------------------------

def cmd_build(args):
    space = _space(args)
    rng = np.random.default_rng(args.seed)
    phases = _phases(args, space, rng)
    doc = {
        "space": space.to_dict(),
        "phases": phases.to_dict(),
        "operators": {
            "C": linalg.matrix_to_dict(cpt.build_C(space, phases)),
            "PT": linalg.matrix_to_dict(cpt.build_PT(space, phases)),
            "CPT": linalg.matrix_to_dict(cpt.build_CPT(space, phases)),
        },
    }
    _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", args)
    kind = "massive" if space.massive else "massless"
    print(f"spin {spin.format_spin(space.spin2)} {kind}: dim {space.dim}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK


def _verify_klein(args):
    space = _space(args)
    rng = np.random.default_rng(args.seed)
    if args.phases == "random":
        report = Report("klein", seed=args.seed)
        for i in range(args.samples):
            sub = cpt.klein_group_report(space, cpt.PhaseConvention.random_admissible(space, rng), tol=args.tol)
            report.extend(sub, prefix=f"sample{i}:")
        report.data = {"dim": space.dim, "samples": args.samples}
        return report
    report = cpt.klein_group_report(space, _phases(args, space, rng), tol=args.tol)
    report.seed = args.seed
    return report


def _verify_lemma1(args):
    report = spin.lemma1_report(spin.parse_spin(args.spin), tol=args.tol)
    report.seed = args.seed
    return report


def _verify_consistency(args):
    space = _space(args)
    return resource.consistency_trials(cpt.build_CPT(space), trials=args.trials or 200, seed=args.seed)


def _verify_antiunitary(args):
    rep, H, psi0, rho0 = resource.conjugation_demo_setup()
    t = math.pi / 4 if args.t is None else args.t
    report = Report("antiunitary-demo", seed=args.seed)
    pure = resource.antiunitary_inconsistency_demo(rep, H, psi0, t)
    mixed = resource.antiunitary_inconsistency_demo(rep, H, rho0, t)
    report.extend(pure, prefix="pure:")
    report.extend(mixed, prefix="mixed:")
    report.data = {"t": t, "pure_residual": pure.data["residual"], "mixed_residual": mixed.data["residual"]}
    return report


def _verify_momentum(args):
    space = _space(args)
    rng = np.random.default_rng(args.seed)
    phases = _phases(args, space, rng)
    grid = momentum.MomentumGrid(args.points, args.p_max)
    return momentum.momentum_report(space, phases, grid, n_random=args.trials or 100, seed=args.seed, tol=args.tol)


def _verify_dfs(args):
    space = _space(args)
    return dfs.dfs_report(space, n_messages=args.trials or 100, seed=args.seed, tol=args.tol)


def _verify_alignment(args):
    params = {"q0": args.q0, "N": args.N, "trials": args.trials or 10_000, "seed": args.seed}
    if args.descriptor:
        params.update(_load_descriptor(args.descriptor, ALIGN_KEYS))
    RunConfig("verify alignment", params, params["seed"], args.out, args.format).validate(ALIGN_KEYS)
    cpt_op = alignment.default_cpt()
    psi = resource.standard_form_state(float(params["q0"]), cpt_op)
    exp = alignment.AlignmentExperiment(psi, int(params["N"]), seed=int(params["seed"]))
    return alignment.run_experiment(exp, cpt_op, trials=int(params["trials"]))


VERIFY = {
    "klein": _verify_klein,
    "lemma1": _verify_lemma1,
    "unitary-consistency": _verify_consistency,
    "antiunitary-demo": _verify_antiunitary,
    "momentum": _verify_momentum,
    "dfs": _verify_dfs,
    "alignment": _verify_alignment,
}


def cmd_verify(args):
    return _emit_report(VERIFY[args.suite](args), args)


def cmd_sweep(args):
    q0s = _parse_float_list(args.q0_grid)
    ns = _parse_int_list(args.N_grid)
    rows = alignment.sweep(q0s, ns, trials=args.trials, seed=args.seed)
    if args.format == "csv":
        buf = io.StringIO()
        alignment.write_sweep_csv(rows, buf)
        _emit(buf.getvalue(), args)
    else:
        _emit(json.dumps(to_jsonable(rows), indent=2, sort_keys=True) + "\n", args)
    bad = [f"q0={r['q0']},N={r['N']}" for r in rows if not r["pass"]]
    if bad:
        print("outside 3 sigma: " + ", ".join(bad), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _parse_noise(text):
    if text is None:
        return None, None
    text = text.strip()
    if text.startswith("depolarize"):
        inner = text[len("depolarize"):].strip("() ")
        try:
            return "depolarize", float(inner) if inner else None
        except ValueError as exc:
            raise UsageError(f"cannot parse noise {text!r}") from exc
    if text in ("twirl", "dephase"):
        return text, None
    raise UsageError(f"unknown noise {text!r}; use twirl, dephase or depolarize(p)")


def _dfs_params(args):
    params = {
        "s": args.spin,
        "massive": not args.massless,
        "sector": args.sector,
        "message": args.message,
        "noise": args.noise,
        "trials": args.trials or 1000,
        "seed": args.seed,
    }
    if args.descriptor:
        params.update(_load_descriptor(args.descriptor, DFS_KEYS))
    RunConfig("encode", params, params["seed"], args.out, args.format).validate(DFS_KEYS)
    return params


def _code_from(params):
    spin2 = spin.parse_spin(params["s"])
    explicit = spin2 <= spin.EXPLICIT_SPIN2_CAP
    space = spin.massive_spin_s_space(spin2, explicit=explicit) if params["massive"] else \
        spin.massless_allowed_states(spin2, explicit=explicit)
    return dfs.build_code(space, sector=params["sector"])


def _read_message(value, dim, rng):
    if value is None or value == "random":
        return dfs.random_message(dim, rng)
    if isinstance(value, str):
        path = Path(value)
        text = path.read_text() if path.exists() else value
        try:
            value = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"cannot parse message {value!r}") from exc
    if isinstance(value, dict):
        return linalg.matrix_from_dict(value).reshape(-1)
    return np.array([complex(*z) if isinstance(z, list) else complex(z) for z in value])


def cmd_encode(args):
    params = _dfs_params(args)
    code = _code_from(params)
    rng = np.random.default_rng(int(params["seed"]))
    msg = _read_message(params["message"], code.logical_dim, rng)
    state = dfs.encode(msg, code)
    report = Report("encode", seed=int(params["seed"]))
    eig = linalg.max_abs(code.cpt @ state - code.sector * state)
    report.add("encoded_state_is_cpt_eigenvector", eig <= args.tol, eig, args.tol)
    noise_name, p = _parse_noise(params["noise"])
    data = {
        "logical_dim": code.logical_dim,
        "capacity_qubits": code.capacity_qubits,
        "sector": "+" if code.sector > 0 else "-",
        "message": linalg.matrix_to_dict(msg),
        "state": linalg.matrix_to_dict(state),
    }
    if noise_name:
        trial = dfs.covariant_noise_trial(code, msg, dfs.make_noise(noise_name, code, p),
                                          trials=int(params["trials"]), seed=int(params["seed"]))
        report.extend(trial)
        data["noise"] = {"model": noise_name, "p": p, **trial.data}
    report.data = data
    if args.state_out:
        Path(args.state_out).write_text(json.dumps(linalg.matrix_to_dict(state)) + "\n")
    return _emit_report(report, args)


def cmd_decode(args):
    params = _dfs_params(args)
    code = _code_from(params)
    try:
        state = linalg.matrix_from_dict(json.loads(Path(args.state).read_text())).reshape(-1)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read state {args.state}: {exc}") from exc
    msg, residual = dfs.decode(state, code)
    report = Report("decode", seed=int(params["seed"]))
    report.add("state_in_code_space", residual <= args.tol, residual, args.tol)
    report.data = {"message": linalg.matrix_to_dict(msg), "residual": residual}
    return _emit_report(report, args)


def cmd_export(args):
    if args.what == "space":
        doc = _space(args).to_dict(with_amplitudes=args.amplitudes)
    else:
        space = _space(args)
        grid = momentum.MomentumGrid(args.points, args.p_max)
        labels = momentum.internal_labels(space)
        amps = np.zeros(len(labels))
        amps[0] = 1.0
        phi = momentum.gaussian_testfn(grid, labels, amps, args.center, args.width)
        if args.apply_cpt:
            phi = momentum.cpt_on_testfn(phi)
        doc = phi.to_dict()
    _emit(json.dumps(doc, indent=1, sort_keys=True) + "\n", args)
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_space_args(p, spin_default="1/2"):
    p.add_argument("--spin", default=spin_default, help='spin as "n" or "n/2"')
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--massive", action="store_true", default=True)
    kind.add_argument("--massless", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="cptkit", description="Unitary CPT operators and CPT frameness tools")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default=None, help="output file (default: stdout)")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--tol", type=float, default=linalg.ATOL)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build C, PT, CPT and the state-space manifest")
    _add_space_args(p, spin_default=None)
    p.add_argument("--phases", default="zero", help="zero, random, or a phase JSON file")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES)
    _add_space_args(p)
    p.add_argument("--phases", default="zero")
    p.add_argument("--samples", type=int, default=100, help="random phase samples (klein)")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--t", type=float, default=None, help="evolution time (antiunitary-demo)")
    p.add_argument("--q0", type=float, default=0.75)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--points", type=int, default=momentum.DEFAULT_POINTS)
    p.add_argument("--p-max", type=float, default=momentum.DEFAULT_PMAX)
    p.add_argument("--descriptor", default=None, help="JSON experiment descriptor (alignment)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="alignment-protocol sweep table")
    p.add_argument("target", choices=("align",))
    p.add_argument("--q0-grid", required=True)
    p.add_argument("--N-grid", required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_sweep)

    for name, func in (("encode", cmd_encode), ("decode", cmd_decode)):
        p = sub.add_parser(name, help=f"{name} a message in a CPT eigensector")
        _add_space_args(p)
        p.add_argument("--sector", default="+", choices=("+", "-"))
        p.add_argument("--message", default="random")
        p.add_argument("--noise", default=None, help="twirl | dephase | depolarize(p)")
        p.add_argument("--trials", type=int, default=None)
        p.add_argument("--descriptor", default=None)
        if name == "encode":
            p.add_argument("--state-out", default=None)
        else:
            p.add_argument("--state", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("export", help="export a state space or a test function")
    p.add_argument("what", choices=("space", "testfn"))
    _add_space_args(p)
    p.add_argument("--amplitudes", action="store_true")
    p.add_argument("--points", type=int, default=momentum.DEFAULT_POINTS)
    p.add_argument("--p-max", type=float, default=momentum.DEFAULT_PMAX)
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--width", type=float, default=momentum.DEFAULT_WIDTH)
    p.add_argument("--apply-cpt", action="store_true")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "spin", "") is None:
        parser.error("--spin is required")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UsageError, ValueError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CptkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
