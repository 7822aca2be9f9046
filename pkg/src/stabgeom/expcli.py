"""Command-line driver for the experiments.

Every sampled state is drawn from its own random stream (seed, sample id), so
results do not depend on the number of workers or on the order in which
samples finish.  Rows are written sorted by sample id.
"""
import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np
from scipy.stats import spearmanr

from . import facets as F
from . import measures as M
from . import samplers as S
from .cliffstab import stabilizer_vertices
from .convex import NTD_TOL

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
CHECKPOINT_EVERY = 1000
GENERATORS = ("haar", "hs", "biased", "walk")
DEFAULT_SAMPLES = {"threshold": 20000}
WALK_TARGETS = {(2, 1): M.t_state, (3, 1): M.strange_state,
                (2, 2): lambda: np.kron(M.t_state(), M.t_state()), (2, 3): M.hoggar_state}


class UsageError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    system: tuple = (2, 2)
    samples: int = 10000
    seed: int = 0
    workers: int = 1
    tol: float = NTD_TOL
    out: str = ""
    format: str = "csv"
    generator: str = "haar"
    mode: str = "global"
    step: float = 0.001
    projection: str = "octahedron"
    with_measures: bool = True
    resume: bool = False

    def validate(self):
        if tuple(self.system) not in M.SYSTEMS.values():
            raise UsageError(f"unsupported system {self.system}; use one of {sorted(M.SYSTEMS.values())}")
        self.system = tuple(int(x) for x in self.system)
        if self.samples < 1:
            raise UsageError("samples must be at least 1")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        if not self.tol > 0:
            raise UsageError("tol must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        if self.generator not in GENERATORS:
            raise UsageError(f"generator must be one of {GENERATORS}")
        if self.mode not in ("global", "local"):
            raise UsageError("mode must be global or local")
        if not 0 < self.step <= 1:
            raise UsageError("step must lie in (0, 1]")
        return self

    @property
    def dim(self):
        d, n = self.system
        return d**n


# ------------------------------------------------------------------ sampling

def state_hash(state):
    return hashlib.sha256(np.round(np.asarray(state, dtype=complex), 12).tobytes()).hexdigest()[:16]


def draw_state(cfg, i):
    """Sample i of the configured generator: (state, extra columns)."""
    d, n = cfg.system
    rng = S.SeededRng(cfg.seed, i)
    if cfg.generator == "haar":
        return S.haar_pure(cfg.dim, rng), {}
    if cfg.generator == "hs":
        return S.hs_mixed(cfg.dim, rng), {}
    if cfg.generator == "biased":
        if d != 2 or n not in S.CIRCUIT_ANGLES:
            raise UsageError("the biased generator needs 2 or 3 qubits")
        return S.biased_circuit_state(n, rng), {}
    # walk: sample i is point i % (steps + 1) of the walk from vertex i // (steps + 1)
    vs = stabilizer_vertices(d, n)
    steps = int(round(1 / cfg.step))
    k, j = divmod(i, steps + 1)
    if k >= len(vs):
        raise UsageError(f"walk generator has only {len(vs) * (steps + 1)} samples")
    eps = j / steps
    v = eps * vs.vertices[k] + (1 - eps) * WALK_TARGETS[cfg.system]()
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        return None, {"vertex": k, "eps": eps}
    return v / nrm, {"vertex": k, "eps": eps}


def _ntd_cols(state, tol):
    r = M.ntd_result(state, tol)
    c = r.certificate
    return {"ntd": r.value, "ntd_dual": c.dual, "gap": c.gap, "status": c.status}


def row_hist(cfg, state):
    return _ntd_cols(state, cfg.tol)


def row_compare(cfg, state):
    row = _ntd_cols(state, cfg.tol)
    rr = M.rom_result(state)
    row.update(rom=rr.value, rom_residual=rr.residual,
               sre2=M.sre(state, 2) if np.ndim(state) == 1 else float("nan"))
    return row


def row_threshold(cfg, state):
    row = {"p_star": S.critical_depolarization(state, cfg.mode)}
    if cfg.with_measures:
        row.update(ntd=M.ntd(state, cfg.tol), rom=M.rom(state))
    return row


def row_facet_audit(cfg, state):
    if cfg.system != (2, 2):
        raise UsageError("facet-audit runs on two qubits")
    row = {"violated": M.violated_facets(state), "violated_images": M.violated_facet_images(state)}
    for r, v in enumerate(M.violated_classes(state)):
        row[f"class_{r + 1}"] = int(v)
    return row


def row_bell(cfg, state):
    if cfg.system == (2, 2):
        a, b = M.dd_two_term(state)
        return {"chsh_dd": M.chsh_dd(state), "two_term_1": a, "two_term_2": b}
    if cfg.system == (2, 3):
        tb = M.three_body_values(state)
        return {"mermin3": M.mermin3(state), "three_body_W": tb["W"],
                "three_body_Hoggar": tb["Hoggar"], "chsh3q": M.chsh3q(state)}
    raise UsageError("bell runs on two or three qubits")


def row_entanglement(cfg, state):
    if cfg.system not in ((2, 2), (2, 3)) or np.ndim(state) != 1:
        raise UsageError("entanglement needs pure states of two or three qubits")
    ent = M.ent_entropy(state) if cfg.system == (2, 2) else M.mean_entropy(state)
    row = _ntd_cols(state, cfg.tol)
    row["entropy"] = ent
    return row


def row_concentration(cfg, state):
    """Audit of the near-vertex bounds for one pure state.

    The audit uses the certified lower bound on the NTD: the bounds grow with
    the distance, so checking them at a lower bound is the stricter test.
    """
    if np.ndim(state) != 1:
        raise UsageError("concentration needs pure states")
    D = cfg.dim
    r = M.ntd_result(state, cfg.tol)
    eps = r.certificate.dual
    row = {"ntd": r.value, "ntd_dual": eps, "applicable": int(eps <= M.epsilon_star(D))}
    j, dist = M.nearest_vertex(state)
    row["nearest_distance"] = dist
    if not row["applicable"]:
        row.update(delta=float("nan"), theorem_ok=1, entropy_gap=float("nan"),
                   entropy_bound=float("nan"), corollary_ok=1)
        return row
    delta = M.concentration_delta(eps, D)
    vertex = stabilizer_vertices(*cfg.system).vertices[j]
    d, n = cfg.system
    gap = 0.0
    for k in range(n):
        dims = [d] * n
        gap = max(gap, abs(M.ent_entropy(state, (k,), dims) - M.ent_entropy(vertex, (k,), dims)))
    bound = M.corollary_bound(eps, D)
    row.update(delta=delta, theorem_ok=int(dist <= delta + 1e-12), entropy_gap=gap,
               entropy_bound=bound, corollary_ok=int(gap <= bound + 1e-12))
    return row


ROW_FUNCS = {"hist": row_hist, "compare": row_compare, "threshold": row_threshold,
             "facet-audit": row_facet_audit, "bell": row_bell, "entanglement": row_entanglement,
             "concentration": row_concentration}


def run_sample(command, cfg, i):
    state, extra = draw_state(cfg, i)
    row = {"sample": i, "stream": i}
    row.update(extra)
    if state is None:
        row["skipped"] = 1
        return row
    row["state_hash"] = state_hash(state)
    row.update(ROW_FUNCS[command](cfg, state))
    return row


def _run_chunk(args):
    command, cfg, ids = args
    return [run_sample(command, cfg, i) for i in ids]


def _checkpoint_path(cfg, command):
    base = cfg.out or f"{command}-{cfg.seed}"
    return base + ".partial.jsonl"


def run_samples(command, cfg, progress=None):
    """Rows for sample ids 0..samples-1, sorted by id (resumable)."""
    done = {}
    ckpt = _checkpoint_path(cfg, command)
    if cfg.resume and os.path.exists(ckpt):
        with open(ckpt) as fh:
            for line in fh:
                row = json.loads(line)
                done[row["sample"]] = row
    todo = [i for i in range(cfg.samples) if i not in done]
    batches = [todo[k:k + CHECKPOINT_EVERY] for k in range(0, len(todo), CHECKPOINT_EVERY)]
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for batch in batches:
            if pool is None:
                rows = _run_chunk((command, cfg, batch))
            else:
                size = max(1, len(batch) // (4 * cfg.workers))
                chunks = [(command, cfg, batch[k:k + size]) for k in range(0, len(batch), size)]
                rows = [r for part in pool.map(_run_chunk, chunks) for r in part]
            for r in rows:
                done[r["sample"]] = r
            if len(batches) > 1:
                with open(ckpt, "a") as fh:
                    for r in rows:
                        fh.write(json.dumps(r) + "\n")
            if progress:
                progress(len(done), cfg.samples)
    finally:
        if pool is not None:
            pool.shutdown()
    if os.path.exists(ckpt):
        os.remove(ckpt)
    return [done[i] for i in sorted(done)]


# ------------------------------------------------------------------ output

def _fmt(v):
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.12g}"
    return str(v)


def rows_to_csv(rows):
    cols = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def write_output(cfg, rows, summary, stream=None):
    if cfg.format == "json":
        text = json.dumps({"summary": {k: _jsonable(v) for k, v in summary.items()},
                           "rows": [{k: _jsonable(v) for k, v in r.items()} for r in rows]},
                          indent=1, sort_keys=True) + "\n"
    else:
        text = rows_to_csv(rows)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    elif stream is not None:
        stream.write(text)


def print_summary(summary, stream):
    for k, v in summary.items():
        stream.write(f"{k}: {_fmt(v) if isinstance(v, float) else v}\n")


# ------------------------------------------------------------------ summaries

def _col(rows, name):
    return np.array([r[name] for r in rows if name in r and not r.get("skipped")], dtype=float)


def summarize(command, cfg, rows):
    s = {"command": command, "system": f"{cfg.system[0]},{cfg.system[1]}", "samples": len(rows),
         "generator": cfg.generator}
    if "gap" in (rows[0] if rows else {}):
        gaps = _col(rows, "gap")
        s["max_gap"] = float(gaps.max())
        s["unconverged"] = sum(r.get("status") not in (None, "converged") for r in rows)
    if command in ("hist", "entanglement", "compare"):
        v = _col(rows, "ntd")
        hist, _ = np.histogram(v, bins=np.arange(0, 1.0001, 0.01))
        s.update(ntd_max=float(v.max()), ntd_mean=float(v.mean()), ntd_mode_bin=float(np.argmax(hist) / 100))
    if command == "compare":
        s["spearman_ntd_rom"] = float(spearmanr(_col(rows, "ntd"), _col(rows, "rom"))[0])
    if command == "threshold":
        p = _col(rows, "p_star")
        s.update(mode=cfg.mode, p_star_max=float(p.max()), p_star_min=float(p.min()))
        if cfg.with_measures and len(p) > 2:
            s["spearman_p_ntd"] = float(spearmanr(p, _col(rows, "ntd"))[0])
    if command == "facet-audit":
        s["mean_violated"] = float(_col(rows, "violated").mean())
        s["mean_violated_images"] = float(_col(rows, "violated_images").mean())
        for r in range(len(F.CLASS_REPRESENTATIVES)):
            s[f"class_{r + 1}_pct"] = float(100 * _col(rows, f"class_{r + 1}").mean())
    if command == "entanglement":
        e, v = _col(rows, "entropy"), _col(rows, "ntd")
        s["max_ntd_at_high_entropy"] = float(v[e > 0.99].max()) if (e > 0.99).any() else float("nan")
    if command == "concentration":
        s["epsilon_star"] = M.epsilon_star(cfg.dim)
        s["applicable"] = int(_col(rows, "applicable").sum())
        s["theorem_violations"] = int((1 - _col(rows, "theorem_ok")).sum())
        s["corollary_violations"] = int((1 - _col(rows, "corollary_ok")).sum())
    if command == "bell":
        for k in (rows[0] if rows else {}):
            if k in ("chsh_dd", "two_term_1", "two_term_2", "mermin3", "chsh3q"):
                s[f"{k}_max"] = float(_col(rows, k).max())
            if k.startswith("three_body"):
                s[f"{k}_min"] = float(_col(rows, k).min())
    return s


# ------------------------------------------------------------------ commands

def cmd_catalog(cfg, out):
    rows, failed = [], 0
    for e in M.catalog():
        for m, want, got, tol, ok in M.evaluate_entry(e):
            rows.append({"state": e.name, "measure": m, "expected": want, "computed": got,
                         "tolerance": tol, "ok": int(ok)})
            failed += not ok
    if cfg.out or cfg.format == "json":
        write_output(cfg, rows, {"failed": failed}, out)
    else:
        for r in rows:
            flag = "ok  " if r["ok"] else "FAIL"
            out.write(f"{flag} {r['state']:<10} {r['measure']:<18} expected {r['expected']:<12.6g} "
                      f"computed {r['computed']:.6g}\n")
    out.write(f"{len(rows) - failed}/{len(rows)} catalog checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def cmd_sampled(command, cfg, out):
    progress = None
    if sys.stderr.isatty():
        progress = lambda k, n: sys.stderr.write(f"\r{k}/{n}")
    rows = run_samples(command, cfg, progress)
    summary = summarize(command, cfg, rows)
    if cfg.out:
        write_output(cfg, rows, summary)
        print_summary(summary, out)
    else:
        write_output(cfg, rows, summary, out)
        print_summary(summary, sys.stderr)
    if command == "concentration" and (summary["theorem_violations"] or summary["corollary_violations"]):
        return EXIT_FAIL
    return EXIT_OK


PROJECTIONS = {"octahedron": F.octahedron, "chsh": F.chsh_projection, "two-body": F.two_body_projection}


def cmd_hull(cfg, out):
    if cfg.projection not in PROJECTIONS:
        raise UsageError(f"projection must be one of {sorted(PROJECTIONS)}")
    pp = PROJECTIONS[cfg.projection]()
    t = time.time()
    fs = F.polytope_facets(pp, name=cfg.projection)
    text = F.export_facets(fs, pp.labels)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    # timing only goes to the console, so facet files stay bit-exact
    note = f" ({time.time() - t:.1f} s)" if cfg.out else ""
    out.write(f"# {cfg.projection}: {len(pp.points)} points, {len(fs)} facets{note}\n")
    return EXIT_OK


def cmd_export_vertices(cfg, out):
    text = stabilizer_vertices(*cfg.system).to_json()
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        out.write(text + "\n")
    return EXIT_OK


FACET_SETS = {
    "table1": lambda: F.table1_facets(),
    "two-qubit": lambda: [F.from_full_vector(r, 2) for r in F.two_qubit_facets()[0]],
    "three-body": lambda: list(F.three_body_facets()),
    "chsh3q": lambda: [F.chsh3q_facet()],
    "one-qubit": lambda: F.one_qudit_facets(2),
}


def cmd_facets(cfg, out, action, which, path):
    if action == "export":
        if which not in FACET_SETS:
            raise UsageError(f"facet set must be one of {sorted(FACET_SETS)}")
        text = F.export_facets(FACET_SETS[which]())
        if cfg.out:
            with open(cfg.out, "w") as fh:
                fh.write(text)
        else:
            out.write(text)
        return EXIT_OK
    if not path:
        raise UsageError("facets import needs a file")
    with open(path) as fh:
        fs = F.import_facets(fh.read())
    n = fs[0].n if fs else 0
    worst = 0.0
    if n in (1, 2, 3):
        vs = stabilizer_vertices(2, n)
        worst = min(min(F.evaluate(f, v) for v in vs.vertices) for f in fs)
    out.write(f"{len(fs)} inequalities on {n} qubits; minimum over vertices {worst:.6g}\n")
    return EXIT_OK if worst >= -1e-9 else EXIT_FAIL


# ------------------------------------------------------------------ parsing

SAMPLED = ("hist", "compare", "threshold", "facet-audit", "bell", "entanglement", "concentration")


def _system(text):
    try:
        d, n = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("system must look like d,n (for example 2,3)") from None
    return (d, n)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("experiment options")
    g.add_argument("--config", help="JSON file with option defaults")
    g.add_argument("--system", type=_system, help="local dimension and count, e.g. 2,3")
    g.add_argument("--samples", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--tol", type=float, help="NTD certificate tolerance")
    g.add_argument("--out", help="output file (stdout when omitted)")
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--generator", choices=GENERATORS)
    g.add_argument("--mode", choices=("global", "local"), help="depolarization model for threshold")
    g.add_argument("--step", type=float, help="walk step")
    g.add_argument("--projection", choices=sorted(PROJECTIONS), help="polytope for hull")
    g.add_argument("--no-measures", dest="with_measures", action="store_false", default=None,
                   help="threshold: skip NTD and RoM columns")
    g.add_argument("--resume", action="store_true", default=None, help="continue from a checkpoint")

    p = argparse.ArgumentParser(prog="stabgeom", description="Stabilizer polytope experiments.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("catalog",) + SAMPLED + ("hull", "export-vertices"):
        sub.add_parser(name, parents=[common])
    fp = sub.add_parser("facets", parents=[common])
    fp.add_argument("action", choices=("export", "import"))
    fp.add_argument("target", help="facet set name (export) or file (import)")
    return p


def make_config(args, command):
    cfg = ExperimentConfig()
    if command in DEFAULT_SAMPLES:
        cfg.samples = DEFAULT_SAMPLES[command]
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        names = {f.name for f in fields(ExperimentConfig)}
        for k, v in data.items():
            if k not in names:
                raise UsageError(f"unknown config key {k!r}")
            if k == "system":
                v = _system(v) if isinstance(v, str) else tuple(v)
            setattr(cfg, k, v)
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            setattr(cfg, f.name, v)
    return cfg.validate()


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args, args.command)
        if args.command == "catalog":
            return cmd_catalog(cfg, out)
        if args.command in SAMPLED:
            return cmd_sampled(args.command, cfg, out)
        if args.command == "hull":
            return cmd_hull(cfg, out)
        if args.command == "export-vertices":
            return cmd_export_vertices(cfg, out)
        return cmd_facets(cfg, out, args.action, args.target if args.action == "export" else None,
                          args.target if args.action == "import" else None)
    except UsageError as exc:
        sys.stderr.write(f"stabgeom: error: {exc}\n")
        return EXIT_USAGE


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
