"""Command-line entry point and network file I/O.

Usage:
    ctxoptics simulate NETWORK [--state STATE]
    ctxoptics verify-context LEFT RIGHT [--detector NAME ...] [--tol TOL]
    ctxoptics verify-relabel NETWORK [--swap I,J | --mapping I:J,...] [--tol TOL]
    ctxoptics bound [INEQUALITY] [--workers N]
    ctxoptics scan [INEQUALITY] [--states N] [--seed S] [--format csv|json]

Exit status is 0 on success, 1 when a verification fails, 2 on any error
(with a JSON error object on stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .context_verifier import ContextPair, verify_relabel_equivalence, verify_shared_observable
from .contextuality_oracle import (
    DEFAULT_SEED,
    bundled_path,
    evaluate_inequality,
    load_inequality_file,
    state_independence_scan,
)
from .mode_calculus import ModeBasis, ModeLabel
from .observable_extraction import DEFAULT_TOL, detection_probability, extract_projector
from .optical_elements import HWP, PBS, NetworkSpec, Relabel

COMMANDS = ("simulate", "verify-context", "verify-relabel", "bound", "scan")
_NETWORK_KEYS = {"paths", "logical_inputs", "elements", "detectors", "name", "description"}


class NetworkFileError(ValueError):
    """Schema violation in a network file; ``where`` names the offending field."""

    def __init__(self, where: str, message: str):
        self.where = where
        super().__init__(f"{where}: {message}")


# -- network files -----------------------------------------------------------

def _label(value, where: str, paths: set[str]) -> ModeLabel:
    if not isinstance(value, str):
        raise NetworkFileError(where, f"expected a 'path.H' / 'path.V' string, got {value!r}")
    try:
        lab = ModeLabel.parse(value)
    except ValueError as exc:
        raise NetworkFileError(where, str(exc)) from None
    if lab.path not in paths:
        raise NetworkFileError(where, f"undeclared path {lab.path!r}")
    return lab


def _path(value, where: str, paths: set[str]) -> str:
    if not isinstance(value, str):
        raise NetworkFileError(where, f"expected a path name, got {value!r}")
    if value not in paths:
        raise NetworkFileError(where, f"undeclared path {value!r}")
    return value


def _element(doc, where: str, paths: set[str]):
    if not isinstance(doc, Mapping):
        raise NetworkFileError(where, "element must be an object")
    kind = doc.get("type")
    if kind == "hwp":
        angle = doc.get("angle")
        if isinstance(angle, bool) or not isinstance(angle, (int, float)) or not math.isfinite(angle):
            raise NetworkFileError(f"{where}.angle", f"expected a finite angle in degrees, got {angle!r}")
        return HWP(_path(doc.get("path"), f"{where}.path", paths), math.radians(angle))
    if kind == "pbs":
        pp = doc.get("paths")
        if not isinstance(pp, list) or len(pp) != 2:
            raise NetworkFileError(f"{where}.paths", "expected a list of two path names")
        a = _path(pp[0], f"{where}.paths[0]", paths)
        b = _path(pp[1], f"{where}.paths[1]", paths)
        if a == b:
            raise NetworkFileError(f"{where}.paths", f"PBS needs two distinct paths, got {a!r} twice")
        return PBS(a, b)
    if kind == "relabel":
        mapping = doc.get("mapping")
        if not isinstance(mapping, Mapping):
            raise NetworkFileError(f"{where}.mapping", "expected an object of mode -> mode")
        pairs = {_label(k, f"{where}.mapping", paths): _label(v, f"{where}.mapping[{k!r}]", paths)
                 for k, v in mapping.items()}
        try:
            return Relabel(pairs)
        except ValueError as exc:
            raise NetworkFileError(f"{where}.mapping", str(exc)) from None
    raise NetworkFileError(f"{where}.type", f"unknown element type {kind!r} (expected hwp, pbs or relabel)")


def network_from_dict(doc) -> NetworkSpec:
    if not isinstance(doc, Mapping):
        raise NetworkFileError("<root>", "network document must be a JSON object")
    unknown = sorted(set(doc) - _NETWORK_KEYS)
    if unknown:
        raise NetworkFileError("<root>", f"unknown fields {unknown}")
    for key in ("paths", "logical_inputs", "elements", "detectors"):
        if key not in doc:
            raise NetworkFileError(key, "required field is missing")
    raw_paths = doc["paths"]
    if not isinstance(raw_paths, list) or not all(isinstance(p, str) and p for p in raw_paths):
        raise NetworkFileError("paths", "expected a list of non-empty path names")
    if len(set(raw_paths)) != len(raw_paths):
        raise NetworkFileError("paths", "duplicate path names")
    for i, p in enumerate(raw_paths):
        if "." in p:
            raise NetworkFileError(f"paths[{i}]", f"path name may not contain '.': {p!r}")
    paths = set(raw_paths)
    logical = doc["logical_inputs"]
    if not isinstance(logical, list) or len(logical) != 3:
        raise NetworkFileError("logical_inputs", "expected exactly three 'path.polarization' strings")
    logical_labels = [_label(x, f"logical_inputs[{i}]", paths) for i, x in enumerate(logical)]
    if not isinstance(doc["elements"], list):
        raise NetworkFileError("elements", "expected a list")
    elements = [_element(e, f"elements[{i}]", paths) for i, e in enumerate(doc["elements"])]
    dets = doc["detectors"]
    if not isinstance(dets, Mapping):
        raise NetworkFileError("detectors", "expected an object of name -> 'path.polarization'")
    detectors = {str(k): _label(v, f"detectors[{k!r}]", paths) for k, v in dets.items()}
    try:
        return NetworkSpec(ModeBasis.from_paths(raw_paths), tuple(elements), detectors,
                           tuple(logical_labels))
    except (KeyError, ValueError) as exc:
        raise NetworkFileError("<network>", str(exc.args[0] if exc.args else exc)) from None


def parse_network_file(path) -> NetworkSpec:
    """Read and validate a network JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkFileError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None
    try:
        return network_from_dict(doc)
    except NetworkFileError as exc:
        raise NetworkFileError(f"{path}: {exc.where}", str(exc).split(": ", 1)[-1]) from None


def degrees_for(theta: float) -> float:
    """Degree value that converts back to exactly ``theta`` radians.

    Every angle read from a file has such a preimage; for other radians values
    (not every float is reachable) the plain conversion is returned.
    """
    d = math.degrees(theta)
    if math.radians(d) == theta:
        return d
    lo = hi = d
    for _ in range(64):
        lo, hi = math.nextafter(lo, -math.inf), math.nextafter(hi, math.inf)
        if math.radians(lo) == theta:
            return lo
        if math.radians(hi) == theta:
            return hi
    return d


def network_to_dict(net: NetworkSpec) -> dict:
    els = []
    for el in net.elements:
        if isinstance(el, HWP):
            els.append({"type": "hwp", "path": el.path, "angle": degrees_for(el.theta)})
        elif isinstance(el, PBS):
            els.append({"type": "pbs", "paths": [el.path_a, el.path_b]})
        else:
            els.append({"type": "relabel", "mapping": {str(a): str(b) for a, b in el.mapping}})
    return {
        "paths": list(net.basis.paths),
        "logical_inputs": [str(x) for x in net.logical_inputs],
        "elements": els,
        "detectors": {k: str(v) for k, v in net.detectors.items()},
    }


def dump_network(net: NetworkSpec) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


# -- reports -----------------------------------------------------------------

def _complex_matrix(m: np.ndarray) -> dict:
    return {"real": np.real(m).tolist(), "imag": np.imag(m).tolist()}


def _parse_state(text: str) -> np.ndarray:
    """Logical state from inline JSON or a JSON file: three numbers or ``[re, im]`` pairs."""
    p = Path(text)
    raw = json.loads(p.read_text(encoding="utf-8")) if p.is_file() else json.loads(text)
    if isinstance(raw, Mapping):
        raw = raw.get("amplitudes")
    if not isinstance(raw, list) or len(raw) != 3:
        raise ValueError("state must be a list of three amplitudes")
    amps = [complex(*a) if isinstance(a, list) else complex(a) for a in raw]
    return np.array(amps, dtype=complex)


@dataclass
class RunConfig:
    command: str
    inputs: list[str] = field(default_factory=list)
    tol: float = DEFAULT_TOL
    seed: int = DEFAULT_SEED
    states: int = 100
    out: str | None = None
    format: str | None = None
    detectors: list[str] = field(default_factory=list)
    relabel: dict[int, int] = field(default_factory=lambda: {0: 2, 2: 0})
    state: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        for p in self.inputs:
            if not Path(p).is_file():
                raise FileNotFoundError(f"input file not found: {p}")


def _cmd_simulate(cfg: RunConfig) -> tuple[dict, bool]:
    net = parse_network_file(cfg.inputs[0])
    psi = _parse_state(cfg.state) if cfg.state else np.array([1, 0, 0], dtype=complex)
    dets, total = {}, np.zeros((3, 3), dtype=complex)
    for name, mode in net.detectors.items():
        p = extract_projector(net, name)
        total += p.matrix
        dets[name] = {
            "output_mode": str(mode),
            "rank": p.rank,
            "projector": _complex_matrix(p.matrix),
            "probability": detection_probability(psi, p),
        }
    report = {
        "command": "simulate",
        "network": cfg.inputs[0],
        "state": {"real": psi.real.tolist(), "imag": psi.imag.tolist()},
        "detectors": dets,
        "completeness_defect": float(np.max(np.abs(total - np.eye(3)))),
    }
    return report, True


def _cmd_verify_context(cfg: RunConfig) -> tuple[dict, bool]:
    left, right = (parse_network_file(p) for p in cfg.inputs[:2])
    names = cfg.detectors or [d for d in left.detectors if d in right.detectors]
    if not names:
        raise ValueError("the two networks share no detector name; pass --detector")
    results = {}
    for name in names:
        results[name] = verify_shared_observable(ContextPair(left, right, name), cfg.tol).to_dict()
    passed = all(r["passed"] for r in results.values())
    report = {
        "command": "verify-context",
        "left": cfg.inputs[0],
        "right": cfg.inputs[1],
        "tolerance": cfg.tol,
        "passed": passed,
        "deviation": max(r["deviation"] for r in results.values()),
        "shared_detectors": results,
    }
    return report, passed


def _cmd_verify_relabel(cfg: RunConfig) -> tuple[dict, bool]:
    net = parse_network_file(cfg.inputs[0])
    rep = verify_relabel_equivalence(net, cfg.relabel, cfg.tol)
    report = {"command": "verify-relabel", "network": cfg.inputs[0], **rep.to_dict()}
    return report, rep.passed


def _inequality_input(cfg: RunConfig) -> str:
    return cfg.inputs[0] if cfg.inputs else str(bundled_path())


def _cmd_bound(cfg: RunConfig) -> tuple[dict, bool]:
    src = _inequality_input(cfg)
    ds = load_inequality_file(src)
    state = _parse_state(cfg.state) if cfg.state else None
    rep = evaluate_inequality(ds.expression, ds.rays, state, ds.graph, workers=cfg.workers)
    report = {
        "command": "bound",
        "inequality": ds.name or Path(src).name,
        "vertices": ds.graph.n,
        "edges": [[ds.rays.names[i], ds.rays.names[j]] for i, j in ds.graph.sorted_edges()],
        "state": "maximally_mixed" if state is None else {"real": state.real.tolist(),
                                                          "imag": state.imag.tolist()},
        **rep.to_dict(),
    }
    return report, True


def _cmd_scan(cfg: RunConfig):
    src = _inequality_input(cfg)
    ds = load_inequality_file(src)
    res = state_independence_scan(ds.expression, ds.rays, cfg.states, cfg.seed)
    if cfg.format == "json":
        return {
            "command": "scan",
            "inequality": ds.name or Path(src).name,
            "seed": cfg.seed,
            "n_states": cfg.states,
            "min": res.min,
            "max": res.max,
            "spread": res.spread,
            "values": list(res.values),
        }, True
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["state_index", "value"])
    for i, v in enumerate(res.values):
        w.writerow([i, repr(v)])
    return buf.getvalue(), True


_DISPATCH = {
    "simulate": _cmd_simulate,
    "verify-context": _cmd_verify_context,
    "verify-relabel": _cmd_verify_relabel,
    "bound": _cmd_bound,
    "scan": _cmd_scan,
}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute one command; returns the process exit status."""
    stdout = stdout or sys.stdout
    if cfg.format == "csv" and cfg.command != "scan":
        raise ValueError("--format csv is only available for scan")
    payload, ok = _DISPATCH[cfg.command](cfg)
    text = payload if isinstance(payload, str) else json.dumps(payload, indent=2) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0 if ok else 1


def _parse_mapping(text: str) -> dict[int, int]:
    try:
        pairs = [item.split(":") for item in text.split(",") if item]
        return {int(a): int(b) for a, b in pairs}
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected I:J,K:L,... got {text!r}") from None


def _parse_swap(text: str) -> dict[int, int]:
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected I,J got {text!r}") from None
    return {a: b, b: a}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxoptics",
        description="Simulate HWP/PBS mode transformers and verify contextuality claims.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=True):
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default=None,
                       help="report format (csv only for scan; default json, scan defaults to csv)")
        if tol:
            p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                           help=f"max-entrywise projector tolerance (default {DEFAULT_TOL:g})")

    p = sub.add_parser("simulate", help="detector projectors and click probabilities for a state")
    p.add_argument("network")
    p.add_argument("--state", help="logical state as inline JSON or a JSON file (default [1,0,0])")
    common(p, tol=False)

    p = sub.add_parser("verify-context", help="shared detector observable is the same in two networks")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--detector", action="append", default=[],
                   help="shared detector name (repeatable; default: every common name)")
    common(p)

    p = sub.add_parser("verify-relabel", help="logical-mode relabeling leaves observables unchanged")
    p.add_argument("network")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--swap", type=_parse_swap, help="swap two logical modes, e.g. 2,0 (default)")
    g.add_argument("--mapping", type=_parse_mapping, help="logical permutation, e.g. 0:1,1:2,2:0")
    common(p)

    for name, helptext in (("bound", "classical bound and quantum value of an inequality"),
                           ("scan", "quantum value over random states (state independence)")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("inequality", nargs="?", help="inequality JSON (default: bundled 13-ray set)")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
        p.add_argument("--states", type=int, default=100, help="number of random pure states (default 100)")
        p.add_argument("--workers", type=int, default=1, help="enumeration threads (default 1)")
        p.add_argument("--state", help="bound only: evaluate at this pure state instead of I/3")
        common(p, tol=False)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    inputs = [x for x in (getattr(ns, k, None) for k in ("network", "left", "right", "inequality")) if x]
    kw = dict(command=ns.command, inputs=inputs, out=ns.out, format=ns.format)
    if getattr(ns, "tol", None) is not None:
        kw["tol"] = ns.tol
    for key in ("seed", "states", "state", "workers"):
        if getattr(ns, key, None) is not None:
            kw[key] = getattr(ns, key)
    if ns.command == "verify-context":
        kw["detectors"] = ns.detector
    if ns.command == "verify-relabel":
        kw["relabel"] = ns.mapping or ns.swap or {0: 2, 2: 0}
    return RunConfig(**kw)


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns))
    except Exception as exc:  # noqa: BLE001 - every failure becomes structured output
        err = {"error": type(exc).__name__, "message": str(exc), "command": ns.command}
        sys.stderr.write(json.dumps(err) + "\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
