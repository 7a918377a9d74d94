"""Command-line front end.

Exit codes: 0 on success, 2 on validation errors (malformed input, a
non-Markovian matrix, an infeasible generator shape), 3 when a computation
succeeds but a residual exceeds the tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .direct_integral import superpose
from .ergodic import (
    classification_decomposition,
    decompose,
    decompose_invariant_measure,
    ergodic_measures,
    verify_decomposition,
)
from .errors import ErgodecError, NotMarkovianError
from .forms import carre_du_champ, classify, girsanov_transform
from .generate import random_form
from .serialize import (
    classification_to_json,
    decomposition_report,
    form_from_json,
    form_to_json,
)

_COMMANDS = ("decompose", "classify", "verify", "girsanov", "superpose", "measures", "gen")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="path of the instance JSON file")
    common.add_argument("--tolerance", type=float, default=1e-10)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--phi", help="comma-separated positive density, or 'random'")
    common.add_argument("--format", choices=("json", "text"), default="json")
    common.add_argument("--out", help="output path (default: stdout)")

    parser = argparse.ArgumentParser(
        prog="ergodec",
        description="Decompose, classify and verify energy forms on finite weighted graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "gen":
            p.add_argument("--n", type=int, required=True)
            p.add_argument("--components", type=int, required=True)
            p.add_argument("--killing-prob", type=float, default=0.0)
            p.add_argument("--density", type=float, default=0.5)
    return parser


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_form(path):
    if path is None:
        raise ErgodecError("--input is required for this command")
    try:
        with open(path) as handle:
            obj = json.load(handle)
    except FileNotFoundError:
        raise ErgodecError(f"no such file: {path}")
    except json.JSONDecodeError as exc:
        raise ErgodecError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    return form_from_json(obj)


def _parse_phi(arg, n, seed):
    if arg is None:
        raise ErgodecError("--phi is required for this command")
    if arg == "random":
        return np.random.default_rng(seed).uniform(0.5, 1.5, size=n)
    values = np.array([float(v) for v in arg.split(",")], dtype=float)
    if len(values) != n:
        raise ErgodecError(f"--phi needs {n} entries, got {len(values)}")
    return values


def _render_text(obj, indent=0) -> list:
    lines = []
    pad = "  " * indent
    if isinstance(obj, dict):
        for key, value in obj.items():
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}{key}:")
                lines.extend(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar_text(value)}")
    elif isinstance(obj, list):
        for value in obj:
            if isinstance(value, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_render_text(value, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar_text(value)}")
    else:
        lines.append(f"{pad}{_scalar_text(obj)}")
    return lines


def _scalar_text(value) -> str:
    if isinstance(value, bool) or not isinstance(value, float):
        return str(value)
    return f"{value:.12g}"


def _emit(report: dict, args) -> None:
    if args.format == "json":
        payload = json.dumps(report, indent=2) + "\n"
    else:
        payload = "\n".join(_render_text(report)) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(payload)
    else:
        sys.stdout.write(payload)


def _cmd_decompose(args) -> int:
    form = _load_form(args.input)
    dec = decompose(form)
    verification = verify_decomposition(dec, tolerance=args.tolerance)
    fiber_classes = classification_decomposition(dec).per_fiber
    report = decomposition_report(dec, verification, fiber_classes)
    _emit(report, args)
    return 0 if verification.passed else 3


def _cmd_classify(args) -> int:
    form = _load_form(args.input)
    cls = classify(form)
    report = {
        "flags": classification_to_json(cls),
        "conservative_part": list(cls.conservative_part),
        "transient_part": list(cls.transient_part),
        "components": {
            z: {
                "points": list(c.points),
                "conservative": c.conservative,
                "transient": c.transient,
                "recurrent": c.recurrent,
            }
            for z, c in cls.per_component.items()
        },
        "jump": form_to_json(form)["edges"],
        "killing": [float(k) for k in form.killing],
        "spectrum": [float(w) for w in form.spectrum],
    }
    _emit(report, args)
    return 0


def _cmd_verify(args) -> int:
    form = _load_form(args.input)
    dec = decompose(form)
    verification = verify_decomposition(dec, tolerance=args.tolerance)
    report = decomposition_report(dec, verification)
    report["passed"] = verification.passed
    _emit(report, args)
    return 0 if verification.passed else 3


def _cmd_girsanov(args) -> int:
    form = _load_form(args.input)
    phi = _parse_phi(args.phi, form.n, args.seed)
    transformed = girsanov_transform(form, phi)

    gamma = carre_du_champ(form)
    rng = np.random.default_rng(args.seed)
    defect = 0.0
    for _ in range(20):
        f = rng.uniform(-1.0, 1.0, size=form.n)
        direct = float(np.dot(gamma(f), phi * phi * form.space.mu))
        defect = max(defect, abs(transformed.energy(f) - direct))
    report = {
        "transformed": form_to_json(transformed),
        "identity_defect": defect,
    }
    _emit(report, args)
    return 0 if defect <= args.tolerance else 3


def _cmd_superpose(args) -> int:
    form = _load_form(args.input)
    dec = decompose(form)
    result = superpose(dec.quotient.space, dec.family, dec.fibers)
    # The superposition reassembles the probability-normalized energy.
    target = form.matrix / dec.normalization_scale
    defect = float(np.abs(result.energy_matrix - target).max())
    report = {
        "scale": dec.normalization_scale,
        "superposition_defect": defect,
        "isomorphism_defect": result.isomorphism_defect,
    }
    _emit(report, args)
    ok = defect <= args.tolerance and result.isomorphism_defect <= args.tolerance
    return 0 if ok else 3


def _cmd_measures(args) -> int:
    form = _load_form(args.input)
    measures = ergodic_measures(form)
    report = {
        "ergodic": [
            {"component": list(m.component), "weights": [float(w) for w in m.weights]}
            for m in measures
        ]
    }
    if form.killing_free:
        mixture = decompose_invariant_measure(form, form.space.mu, tol=args.tolerance)
        report["mu_mixture"] = {
            "weights": [float(w) for w in mixture.weights],
            "reconstruction_defect": mixture.reconstruction_defect,
        }
    else:
        report["mu_mixture"] = None
    _emit(report, args)
    return 0


def _cmd_gen(args) -> int:
    form = random_form(
        args.seed, args.n, args.components, args.killing_prob, args.density
    )
    _emit(form_to_json(form), args)
    return 0


_HANDLERS = {
    "decompose": _cmd_decompose,
    "classify": _cmd_classify,
    "verify": _cmd_verify,
    "girsanov": _cmd_girsanov,
    "superpose": _cmd_superpose,
    "measures": _cmd_measures,
    "gen": _cmd_gen,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except NotMarkovianError as exc:
        if exc.witness is not None:
            witness = ", ".join(f"{v:.12g}" for v in np.asarray(exc.witness))
            return _fail(f"{exc} (contraction witness: [{witness}])")
        return _fail(str(exc))
    except ErgodecError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
