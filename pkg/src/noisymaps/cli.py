"""Command-line front end: ``noisymaps <command> [--key value ...]``.

Every run writes its CSV/JSON artifacts plus ``manifest.json`` into the
output directory. Options may also come from a ``key=value`` config file
(``--config``); flags win over the file. The output directory is taken from
``--output-dir``, else ``$NOISYMAPS_OUTPUT_DIR``, else the config file, else
``./noisymaps-out``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .channels import ConvergenceError, parse_channel, validate_cptp
from .circuits import circuit_verify
from .dynamics import EvolutionConfig, Propagator, entropy_series, evolve, grover_success_series, initial_state, \
    step_superoperator, wigner_series
from .hilbert import linear_entropy
from .maps import parse_map
from .spectra import ADC_DEGENERACY_TOL, DEGENERACY_TOL, EigensolverError, compose, spectrum, to_matrix

OUTPUT_ENV = "NOISYMAPS_OUTPUT_DIR"
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

# command -> {key: (type, default)}
COMMANDS: dict[str, dict[str, tuple]] = {
    "channel-spectrum": {"channel": (str, "dc"), "n": (int, 32), "eps": (float, 0.4), "tol": (float, None),
                         "seed": (int, 0)},
    "map-spectrum": {"map": (str, "grover:30"), "channel": (str, "dc"), "n": (int, 32), "eps": (float, 0.4),
                     "tol": (float, None), "seed": (int, 0)},
    "evolve": {"map": (str, "none"), "channel": (str, "dc"), "n": (int, 32), "eps": (float, 0.8),
               "steps": (int, 3), "init": (str, "cat:0.4,0.25,0.6,0.75"), "wigner_stride": (int, 0),
               "seed": (int, 0)},
    "grover": {"n": (int, 32), "marked": (str, "30"), "channel": (str, "none"), "eps": (float, 0.3),
               "steps": (int, 8), "wigner_stride": (int, 0), "seed": (int, 0)},
    "entropy-sweep": {"maps": (str, "baker,cat-hyp,cat-par,cat-ell"), "channels": (str, "dc,pdc,adc"),
                      "n": (int, 32), "eps": (float, 0.2), "steps": (int, 30), "sample_every": (int, 1),
                      "init": (str, "coherent:0.25,0.25"), "workers": (int, 1), "seed": (int, 0)},
    "circuit-verify": {"which": (str, "dc"), "qubits": (int, 2), "eps": (float, 0.3), "seed": (int, 0)},
    "preset": {"name": (str, None), "workers": (int, 1), "seed": (int, 0)},
}
PRESETS = ("fig1", "fig5", "fig6", "fig8", "fig9-11")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- writers

def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _num(x: float) -> str:
    return repr(float(x))


def write_series_csv(path: Path, iterations, values) -> None:
    lines = ["iteration,value"] + [f"{int(k)},{_num(v)}" for k, v in zip(iterations, values)]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_spectrum_csv(path: Path, report) -> None:
    mult = [report.clusters[c][1] for c in report.cluster_ids]
    lines = ["re,im,cluster_id,multiplicity"]
    lines += [f"{_num(z.real)},{_num(z.imag)},{int(c)},{m}"
              for z, c, m in zip(report.eigenvalues, report.cluster_ids, mult)]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_grid_csv(path: Path, values: np.ndarray) -> None:
    lines = [",".join(_num(v) for v in row) for row in values]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_json(path: Path, obj) -> None:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_series_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0].astype(int), data[:, 1]


def read_spectrum_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0] + 1j * data[:, 1], data[:, 2].astype(int), data[:, 3].astype(int)


# ---------------------------------------------------------------- jobs

def _channel_descriptor(desc: str, seed: int) -> str:
    # a bare pdc-rand takes the run seed
    return f"pdc-rand:{seed}" if desc == "pdc-rand" else desc


def _cluster_summary(report) -> list[dict]:
    return [{"re": v.real, "im": v.imag, "multiplicity": m} for v, m in report.clusters]


def _spectrum_job(out: Path, matrix: np.ndarray, tol: float, extra: dict) -> dict:
    report = spectrum(matrix, tol)
    write_spectrum_csv(out / "spectrum.csv", report)
    summary = dict(extra)
    summary["tol"] = tol
    summary["n_clusters"] = len(report.clusters)
    summary["clusters"] = _cluster_summary(report) if len(report.clusters) <= 64 else "see spectrum.csv"
    return {"artifacts": [out / "spectrum.csv"], "summary": summary}


def run_channel_spectrum(cfg: dict, out: Path) -> dict:
    desc = _channel_descriptor(cfg["channel"], cfg["seed"])
    ch = parse_channel(desc, cfg["n"], cfg["eps"])
    tol = cfg["tol"] or (ADC_DEGENERACY_TOL if desc.startswith("adc") else DEGENERACY_TOL)
    cptp = validate_cptp(ch)
    return _spectrum_job(out, to_matrix(ch), tol, {"label": ch.label, "cptp": cptp.__dict__})


def run_map_spectrum(cfg: dict, out: Path) -> dict:
    desc = _channel_descriptor(cfg["channel"], cfg["seed"])
    ch = parse_channel(desc, cfg["n"], cfg["eps"])
    u = parse_map(cfg["map"], cfg["n"])
    tol = cfg["tol"] or (ADC_DEGENERACY_TOL if desc.startswith("adc") else DEGENERACY_TOL)
    composed = compose(ch, u)
    return _spectrum_job(out, to_matrix(composed), tol, {"label": composed.label})


def _wigner_frames(out: Path, traj, stride: int, config: dict) -> list[Path]:
    frames = wigner_series(traj, stride)
    paths = []
    for i, grid in enumerate(frames):
        path = out / "wigner" / f"frame_{i * stride:04d}.csv"
        write_grid_csv(path, grid.values)
        paths.append(path)
    manifest = {"config": config, "stride": stride, "normalization": frames[0].normalization,
                "frames": [{"iteration": i * stride, "file": p.name} for i, p in enumerate(paths)]}
    write_json(out / "wigner" / "frames.json", manifest)
    return paths + [out / "wigner" / "frames.json"]


def run_evolve(cfg: dict, out: Path) -> dict:
    ec = EvolutionConfig(map=cfg["map"], channel=_channel_descriptor(cfg["channel"], cfg["seed"]),
                         dim=cfg["n"], eps=cfg["eps"], steps=cfg["steps"], initial=cfg["init"])
    traj = evolve(ec)
    ent = entropy_series(traj)
    write_series_csv(out / "entropy.csv", range(len(ent)), ent)
    artifacts = [out / "entropy.csv"]
    if cfg["wigner_stride"] > 0:
        artifacts += _wigner_frames(out, traj, cfg["wigner_stride"], cfg)
    return {"artifacts": artifacts, "summary": {"final_entropy": float(ent[-1])}}


def run_grover(cfg: dict, out: Path) -> dict:
    marked = [int(w) for w in str(cfg["marked"]).split(",")]
    ec = EvolutionConfig(map="grover:" + ",".join(map(str, marked)),
                         channel=_channel_descriptor(cfg["channel"], cfg["seed"]),
                         dim=cfg["n"], eps=cfg["eps"], steps=cfg["steps"], initial="momentum:0")
    traj = evolve(ec)
    ps = grover_success_series(traj, marked)
    write_series_csv(out / "success.csv", range(len(ps)), ps)
    artifacts = [out / "success.csv"]
    if cfg["wigner_stride"] > 0:
        artifacts += _wigner_frames(out, traj, cfg["wigner_stride"], cfg)
    best = int(np.argmax(ps))
    return {"artifacts": artifacts, "summary": {"argmax": best, "max_success": float(ps[best])}}


def _sweep_one(out: Path, m: str, ch: str, cfg: dict) -> tuple[Path, float]:
    ec = EvolutionConfig(map=m, channel=ch, dim=cfg["n"], eps=cfg["eps"], steps=cfg["steps"], initial=cfg["init"])
    step = cfg["sample_every"]
    if step <= 1:
        ks = np.arange(cfg["steps"] + 1)
        ent = entropy_series(evolve(ec))
    else:
        ks = np.arange(0, cfg["steps"] + 1, step)
        prop = Propagator(step_superoperator(ec))
        rho = initial_state(cfg["init"], cfg["n"])
        v = rho.reshape(-1)
        ent = []
        for _ in ks:
            ent.append(linear_entropy(v.reshape(rho.shape)))
            v = prop.apply(v, step)
    path = out / f"entropy_{_slug(m)}__{_slug(ch)}.csv"
    write_series_csv(path, ks, ent)
    return path, float(ent[-1])


def _slug(desc: str) -> str:
    return desc.replace(":", "-").replace(",", "_")


def split_descriptors(text: str) -> list[str]:
    """Split ``"dc,pdc-line:1,-1,0"`` into descriptors; numeric pieces stay with their head."""
    out: list[str] = []
    for piece in (p.strip() for p in text.split(",")):
        if not piece:
            continue
        if out and not piece[0].isalpha():
            out[-1] += "," + piece
        else:
            out.append(piece)
    return out


def run_entropy_sweep(cfg: dict, out: Path) -> dict:
    maps = split_descriptors(cfg["maps"])
    chans = [_channel_descriptor(c, cfg["seed"]) for c in split_descriptors(cfg["channels"])]
    jobs = [(m, c) for m in maps for c in chans]
    return _fan_out(cfg["workers"], [(lambda m=m, c=c: _sweep_one(out, m, c, cfg)) for m, c in jobs],
                    lambda results: {"artifacts": [p for p, _ in results],
                                     "summary": {f"{m}|{c}": s for (m, c), (_, s) in zip(jobs, results)}})


def _fan_out(workers: int, thunks, collect):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda f: f(), thunks))
    else:
        results = [f() for f in thunks]
    return collect(results)


def run_circuit_verify(cfg: dict, out: Path) -> dict:
    report = circuit_verify(cfg["which"], cfg["qubits"], cfg["eps"], cfg["seed"])
    write_json(out / "report.json", report)
    print(json.dumps({"max_deviation": report["max_deviation"], "pass": report["pass"]}))
    return {"artifacts": [out / "report.json"], "summary": report}


# ---------------------------------------------------------------- presets

def preset_jobs(name: str, seed: int) -> list[tuple[str, str, dict]]:
    """Expand a figure preset into (command, subdirectory, config) jobs."""
    N = 32
    jobs: list[tuple[str, str, dict]] = []
    if name == "fig1":
        jobs.append(("evolve", "dc_cat", {"map": "none", "channel": "dc", "n": N, "eps": 0.8, "steps": 3,
                                          "init": "cat:0.4,0.25,0.6,0.75", "wigner_stride": 1}))
    elif name == "fig5":
        for ch in ("dc", "pdc", f"pdc-rand:{seed}", "pdc-line:1,0,2", "adc"):
            jobs.append(("channel-spectrum", _slug(ch), {"channel": ch, "n": N, "eps": 0.4}))
    elif name == "fig6":
        jobs.append(("entropy-sweep", "dc_pdc", {"channels": "dc,pdc", "eps": 0.2, "steps": 30,
                                                 "init": "coherent:0.25,0.25"}))
        jobs.append(("entropy-sweep", "adc", {"channels": "adc", "eps": 0.2, "steps": 400_000,
                                              "sample_every": 5_000, "init": "coherent:0.25,0.25"}))
    elif name == "fig8":
        lines = ["pdc-line:1,1,0", "pdc-line:1,-1,0", "pdc-line:0,1,0", "pdc-line:1,0,0"]
        hyp_lines = ["pdc-line:1,2,0", "pdc-line:1,-2,0", "pdc-line:0,1,0", "pdc-line:1,0,0"]
        jobs.append(("entropy-sweep", "baker", {"maps": "baker", "channels": ",".join(["dc", *lines, "adc"]),
                                                "eps": 0.2, "steps": 30, "init": f"momentum:{round(0.25 * N)}"}))
        jobs.append(("entropy-sweep", "cat-hyp", {"maps": "cat-hyp", "channels": ",".join(["dc", *hyp_lines, "adc"]),
                                                  "eps": 0.2, "steps": 30, "init": "coherent:0.25,0.25"}))
        jobs.append(("entropy-sweep", "cat-par", {"maps": "cat-par", "channels": ",".join(["dc", *lines, "adc"]),
                                                  "eps": 0.2, "steps": 200, "init": "coherent:0.25,0.25"}))
    elif name == "fig9-11":
        for ch in ("none", "dc", "pdc", "adc"):
            jobs.append(("map-spectrum", f"spectrum_{ch}", {"map": "grover:30", "channel": ch, "n": N, "eps": 0.4}))
            jobs.append(("grover", f"success_{ch}", {"n": N, "marked": "30", "channel": ch, "eps": 0.3,
                                                     "steps": 8, "wigner_stride": 1}))
    else:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    return jobs


def run_preset(cfg: dict, out: Path) -> dict:
    if not cfg["name"]:
        raise ConfigError("preset needs --name")
    jobs = preset_jobs(cfg["name"], cfg["seed"])

    def job(command, sub, overrides):
        sub_cfg = resolve_config(command, {}, {**overrides, "seed": cfg["seed"]})
        return run_command(command, sub_cfg, out / sub)

    thunks = [(lambda c=c, s=s, o=o: job(c, s, o)) for c, s, o in jobs]
    return _fan_out(cfg["workers"], thunks, lambda manifests: {
        "artifacts": [out / s / "manifest.json" for _, s, _ in jobs],
        "summary": {s: m.get("summary") for (_, s, _), m in zip(jobs, manifests)},
    })


RUNNERS = {
    "channel-spectrum": run_channel_spectrum,
    "map-spectrum": run_map_spectrum,
    "evolve": run_evolve,
    "grover": run_grover,
    "entropy-sweep": run_entropy_sweep,
    "circuit-verify": run_circuit_verify,
    "preset": run_preset,
}


# ---------------------------------------------------------------- config

def _norm_key(key: str) -> str:
    return key.strip().replace("-", "_")


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        values[_norm_key(key)] = value.strip()
    return values


def resolve_config(command: str, file_values: dict, flag_values: dict) -> dict:
    """Merge defaults < file < flags, rejecting unknown keys."""
    spec = COMMANDS[command]
    cfg = {}
    for source in (file_values, flag_values):
        for key, value in source.items():
            key = _norm_key(key)
            if key == "output_dir":
                continue
            if key not in spec:
                raise ConfigError(f"unknown key {key!r} for {command}; allowed: {sorted(spec)}")
            typ = spec[key][0]
            try:
                cfg[key] = typ(value) if value is not None else None
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return {key: cfg.get(key, default) for key, (_, default) in spec.items()}


def run_command(command: str, cfg: dict, out: Path) -> dict:
    """Run one command into ``out`` and write its manifest last."""
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = RUNNERS[command](cfg, out)
    manifest = {
        "command": command,
        "config": cfg,
        "artifacts": [str(Path(p).relative_to(out)) for p in result["artifacts"]],
        "summary": result.get("summary"),
        "duration_s": time.perf_counter() - start,
        "version": __version__,
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisymaps", description="Generalized noise channels on quantized torus maps.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for command, spec in COMMANDS.items():
        p = sub.add_parser(command)
        p.add_argument("--config", help="key=value file; flags override it")
        p.add_argument("--output-dir", "-o", help=f"artifact directory (default ${OUTPUT_ENV} or ./noisymaps-out)")
        for key, (typ, default) in spec.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, type=typ, default=argparse.SUPPRESS,
                           help=f"default: {default}")
        if command == "preset":
            p.add_argument("preset_name", nargs="?", choices=PRESETS, help="figure preset")
    return parser


def _error(kind: str, exc: BaseException, code: int) -> int:
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    flag_out = args.pop("output_dir", None)
    positional = args.pop("preset_name", None)
    if positional:
        args.setdefault("name", positional)
    try:
        file_values = read_config_file(config_path) if config_path else {}
        out = Path(flag_out or os.environ.get(OUTPUT_ENV) or file_values.get("output_dir") or "noisymaps-out")
        cfg = resolve_config(command, file_values, args)
        manifest = run_command(command, cfg, out)
    except (EigensolverError, ConvergenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        return _error("numerical", exc, EXIT_NUMERIC)
    except (ValueError, IndexError, KeyError, OSError) as exc:
        return _error("config", exc, EXIT_CONFIG)
    print(f"wrote {out / 'manifest.json'} ({manifest['duration_s']:.2f} s)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
