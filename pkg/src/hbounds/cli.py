"""Command-line front end.

Exit codes: 0 success, 2 parse error, 3 geometry error, 4 inadmissible
topology, 5 residue violation, 6 extension failure.
"""

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ExtensionError, GeometryError, HBoundsError, ResidueViolation, TopologyError

EXIT_PARSE, EXIT_GEOMETRY, EXIT_INADMISSIBLE, EXIT_RESIDUE, EXIT_EXTENSION = 2, 3, 4, 5, 6


class ParseError(Exception):
    pass


@dataclass(frozen=True)
class JobConfig:
    command: str
    geometry: str = None
    topology: str = None
    mn: tuple = None
    tol: float = 1e-8
    out: str = None
    sweep_kappa: tuple = ()


# ----------------------------------------------------------------------
# deterministic JSON

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, float):
        if math.isnan(obj):
            return "NaN"
        if math.isinf(obj):
            return "Infinity" if obj > 0 else "-Infinity"
        text = format(obj, ".17g")
        if all(c not in text for c in ".eE"):
            text += ".0"
        return text
    return json.dumps(obj)


def dumps(obj, indent=2):
    """JSON text with floats at 17 significant digits."""
    return _encode(_plain(obj), indent, 0) + "\n"


def _emit(text, out, suffix=None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    if suffix is not None:
        path = path.with_suffix(suffix)
    path.write_text(text)


def _csv(rows, header):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in r])
    return buf.getvalue()


# ----------------------------------------------------------------------
# loaders

def _load_json(path):
    if path is None:
        raise ParseError("missing input path")
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _load_geometry(path):
    from .geometry import polyhedron_from_dict
    data = _load_json(path)
    try:
        return polyhedron_from_dict(data)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"bad geometry file: {exc}") from exc


def _as_polyhedron(geo):
    return getattr(geo, "polyhedron", geo)


def _load_topology(path, n_faces):
    from .topology import TangentTopology
    data = _load_json(path)
    if not isinstance(data, dict):
        raise ParseError("topology file must hold an object")
    try:
        return TangentTopology.from_dict(data, n_faces)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad topology file: {exc}") from exc


def _spec(tol):
    from .quadrature import QuadratureSpec
    try:
        return QuadratureSpec(rtol=tol)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


# ----------------------------------------------------------------------
# commands

def cmd_sectors(cfg):
    from .sectors import enumerate_sectors
    poly = _as_polyhedron(_load_geometry(cfg.geometry))
    part = enumerate_sectors(poly)
    report = part.report()
    _emit(dumps({"sectors": report, "approximate": part.approximate,
                 "total_area": math.fsum(r["area"] for r in report)}), cfg.out)
    if cfg.out is not None:
        _emit(_csv([(r["sigma"], r["area"]) for r in report], ["sigma", "area"]), cfg.out, ".csv")
    return 0


def cmd_lower_bound(cfg):
    from .connection import lower_bound_energy
    from .sectors import enumerate_sectors
    poly = _as_polyhedron(_load_geometry(cfg.geometry))
    topo = _load_topology(cfg.topology, len(poly.faces))
    part = enumerate_sectors(poly)
    _emit(dumps(lower_bound_energy(poly, part, topo)), cfg.out)
    return 0


def _invariant_rows(fld, spec):
    from .octant import map_invariants
    inv = map_invariants(fld, spec)
    cf = inv.closed_form
    rows = {"numeric": {"e": list(inv.e), "k": list(inv.k), "omega": inv.omega,
                        "omega_err": inv.omega_err}}
    if cf is not None:
        rows["closed_form"] = cf.to_dict()
        rows["agree"] = (tuple(cf.e) == inv.e and tuple(cf.k) == inv.k
                         and abs(cf.omega - inv.omega) < 1e-6 * max(1.0, abs(cf.omega)))
    return rows


def cmd_construct(cfg):
    from .octant import mn_example_field, surgered_map
    from .quadrature import wrapping_numbers_numeric
    from .sectors import enumerate_sectors, sign_string
    from .topology import OctantTopology
    spec = _spec(cfg.tol)
    if cfg.mn is not None:
        from .geometry import rectangular_prism
        M, N = cfg.mn
        cube = rectangular_prism(1.0, 1.0, 1.0)
        part = enumerate_sectors(cube.polyhedron)
        fields = mn_example_field(M, N, cube)
        table = {}
        for a, f in enumerate(fields):
            table[a] = wrapping_numbers_numeric(f, part, None)["w"]
        sums = {sign_string(s): sum(table[a][s] for a in table) for s in part.sign_vectors()}
        out = {"fields": [{"vertex": a, "M": M, "N": N} for a in range(8)],
               "wrapping": {str(a): {sign_string(s): v for s, v in d.items()}
                            for a, d in table.items()},
               "sector_sums": sums, "sum_rule": all(v == 0 for v in sums.values()),
               "invariants": _invariant_rows(fields[0].base, spec)}
        _emit(dumps(out), cfg.out)
        return 0
    data = _load_json(cfg.topology)
    try:
        t = OctantTopology.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad octant topology: {exc}") from exc
    fld = surgered_map(t.e, t.k, t.omega)
    out = {"map": fld.to_dict(), "target": t.to_dict(), "invariants": _invariant_rows(fld, spec)}
    _emit(dumps(out), cfg.out)
    return 0


def _kappa_prism(base, kappa):
    from .geometry import rectangular_prism
    Lz = 2 * base.lz
    return rectangular_prism(kappa * Lz, Lz, Lz)


def cmd_extend(cfg):
    from .battery import loglog_slope, mn_topology, prism_fields
    from .extension import extend_and_bound
    from .geometry import Prism
    from .octant import mn_example_field
    from .sectors import enumerate_sectors
    spec = _spec(cfg.tol)
    prism = _load_geometry(cfg.geometry)
    if not isinstance(prism, Prism):
        raise GeometryError("extension needs a rectangular prism geometry")
    part = enumerate_sectors(prism.polyhedron)

    def build(p, M=None):
        if cfg.mn is not None:
            mm = cfg.mn[0] if M is None else M
            return mn_example_field(mm, cfg.mn[1], p), mn_topology(mm, cfg.mn[1])
        topo = _load_topology(cfg.topology, 6)
        return prism_fields(p, topo), topo

    fields, topo = build(prism)
    rep = extend_and_bound(prism, fields, spec, topology=topo, partition=part)
    out = rep.to_dict()
    if cfg.sweep_kappa:
        rows = []
        for kap in cfg.sweep_kappa:
            p = _kappa_prism(prism, kap)
            f, t = build(p)
            r = extend_and_bound(p, f, spec, topology=t, partition=part)
            rows.append((float(kap), r.E_total, r.E_minus, r.ratio))
        slope = loglog_slope([r[0] for r in rows], [r[3] for r in rows]) if len(rows) > 1 else None
        out["kappa_sweep"] = {"rows": [list(r) for r in rows], "slope": slope}
        if cfg.out is not None:
            _emit(_csv(rows, ["kappa", "E_total", "E_minus", "ratio"]),
                  Path(cfg.out).with_name(Path(cfg.out).stem + "_kappa"), ".csv")
    if cfg.mn is not None:
        rows = []
        for M in range(cfg.mn[0] + 1):
            r = rep
            if M < cfg.mn[0]:
                f, t = build(prism, M)
                r = extend_and_bound(prism, f, spec, topology=t, partition=part)
            rows.append((M, r.E_total, r.E_minus, r.ratio))
        out["energy_vs_M"] = [list(r) for r in rows]
        if cfg.out is not None:
            _emit(_csv(rows, ["M", "E_total", "E_minus", "ratio"]),
                  Path(cfg.out).with_name(Path(cfg.out).stem + "_M"), ".csv")
    _emit(dumps(out), cfg.out)
    return 0


COMMANDS = {"sectors": cmd_sectors, "lower-bound": cmd_lower_bound,
            "construct": cmd_construct, "extend": cmd_extend}


# ----------------------------------------------------------------------
# argument parsing

def _kappas(text):
    try:
        vals = tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad kappa list {text!r}") from exc
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("kappa values must be >= 1")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="hbounds", description="Energy bounds for tangent "
                                "unit-vector fields on convex polyhedra.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tol", type=float, default=1e-8, help="quadrature relative tolerance")
        sp.add_argument("--out", help="output path (JSON; CSV files are written alongside)")

    s = sub.add_parser("sectors", help="sector partition of a polyhedron")
    s.add_argument("--geometry", required=True)
    common(s)
    s = sub.add_parser("lower-bound", help="minimal-connection lower bound")
    s.add_argument("--geometry", required=True)
    s.add_argument("--topology", required=True)
    common(s)
    s = sub.add_parser("construct", help="octant map for a topology, or the (M, N) example")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--topology")
    g.add_argument("--mn", nargs=2, type=int, metavar=("M", "N"))
    common(s)
    s = sub.add_parser("extend", help="extend octant fields to a prism and bound the energy")
    s.add_argument("--geometry", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--topology")
    g.add_argument("--mn", nargs=2, type=int, metavar=("M", "N"))
    s.add_argument("--sweep-kappa", type=_kappas, default=())
    common(s)
    return p


def parse_config(argv):
    args = build_parser().parse_args(argv)
    mn = tuple(args.mn) if getattr(args, "mn", None) else None
    if mn is not None and min(mn) < 0:
        raise ParseError("M and N must be nonnegative")
    return JobConfig(command=args.command, geometry=getattr(args, "geometry", None),
                     topology=getattr(args, "topology", None), mn=mn, tol=args.tol,
                     out=args.out, sweep_kappa=tuple(getattr(args, "sweep_kappa", ()) or ()))


def main(argv=None):
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:  # argparse reports usage errors with code 2
        return int(exc.code or 0)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        return COMMANDS[cfg.command](cfg)
    except ParseError as exc:
        code, msg = EXIT_PARSE, exc
    except GeometryError as exc:
        code, msg = EXIT_GEOMETRY, exc
    except ResidueViolation as exc:
        code, msg = EXIT_RESIDUE, exc
    except TopologyError as exc:
        code, msg = EXIT_INADMISSIBLE, exc
    except ExtensionError as exc:
        code, msg = EXIT_EXTENSION, exc
    except HBoundsError as exc:
        code, msg = EXIT_EXTENSION if cfg.command == "extend" else EXIT_PARSE, exc
    print(f"error: {type(msg).__name__}: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())


def main_entry():
    sys.exit(main())
