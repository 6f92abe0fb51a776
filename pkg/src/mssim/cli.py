"""Command-line surface: simulate-ms, qaoa-heatmap, compare, fit-spam,
calibrate, and a hidden verify subcommand for oracle spot checks.

Exit codes: 0 success, 2 configuration error, 3 numerical/singularity error,
4 data-mismatch error.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import USE_NUMBA
from .chain import MSPulse, ising_couplings, loop_time, maxcut_weights
from .config import load_config
from .datasets import (load_experiment_csv, load_sim_csv, write_heatmap_csv,
                       write_ms_csv, bitstrings)
from .errors import ConfigError, DataMismatchError, NumericsError
from .noise import compose_fluctuations, fit_bitflip_epsilon, noisy_measurement_probs
from .propagator import reduced_density, trace_distance, zero_state_x_amplitudes
from .qaoa import MaxCutInstance, calibrate_rabi_mp, heatmap_sweep
from .stats import ObservationSet, chi2_red, rmse, stderr_prob
from .fock import fock_reduced_density


def _write_json(path, payload):
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _manifest(cfg, command, outputs, extra=None):
    payload = {
        "command": command,
        "mssim_version": __version__,
        "seed": cfg.seed,
        "config": cfg.raw,
        "outputs": outputs,
        "numba": USE_NUMBA,
    }
    if extra:
        payload.update(extra)
    return payload


def _ms_times(cfg):
    tl = loop_time(cfg.pulse, cfg.chain)
    if cfg.ms["times_s"] is not None:
        times = np.asarray(cfg.ms["times_s"], dtype=float)
    else:
        k = cfg.ms["max_loops"] * cfg.ms["points_per_loop"]
        times = tl * np.arange(k + 1) / cfg.ms["points_per_loop"]
    return times, times / tl


def cmd_simulate_ms(cfg, out_dir, fmt):
    if cfg.pulse is None:
        raise ConfigError("simulate-ms needs a pulse section")
    times, loops = _ms_times(cfg)
    shots = cfg.ms["shots"]
    nstates = 2**cfg.chain.n
    probs = np.empty((times.size, nstates))
    errs = np.empty_like(probs)
    purity = np.empty(times.size)
    for k, t in enumerate(times):
        rho = compose_fluctuations(cfg.chain, cfg.pulse, t, cfg.noise)
        purity[k] = rho.purity()
        p = noisy_measurement_probs(rho, cfg.noise.spam)
        probs[k] = p
        errs[k] = [stderr_prob(min(max(x, 0.0), 1.0), shots) for x in p]
    out_csv = out_dir / "ms_populations.csv"
    if fmt == "csv":
        write_ms_csv(out_csv, times, loops, probs, errs, purity)
    else:
        out_csv = out_dir / "ms_populations.json"
        rows = [{"time_s": float(times[k]), "loop": float(loops[k]),
                 **{f"P_{z}": float(probs[k, i]) for i, z in enumerate(bitstrings(cfg.chain.n))},
                 **{f"dP_{z}": float(errs[k, i]) for i, z in enumerate(bitstrings(cfg.chain.n))},
                 "purity": float(purity[k])} for k in range(times.size)]
        _write_json(out_csv, rows)
    manifest = _manifest(cfg, "simulate-ms", [str(out_csv)],
                         {"shots": shots, "n_times": int(times.size)})
    _write_json(out_dir / "ms_manifest.json", manifest)
    print(f"wrote {out_csv}")
    return 0


def _calibration_from_config(cfg):
    cal = cfg.qaoa["calibration"]
    return calibrate_rabi_mp(cfg.chain, cfg.pulse, mode=cal["mode"],
                             n_loops_cal=cal["n_loops"],
                             observable_state=cal["observable_state"],
                             gamma_scan_max=cal["gamma_scan_max"])


def cmd_qaoa_heatmap(cfg, out_dir, fmt, full_sweep=False):
    if cfg.pulse is None:
        raise ConfigError("qaoa-heatmap needs a pulse section")
    seed = cfg.qaoa["seed"] if cfg.qaoa["seed"] is not None else cfg.seed
    template = cfg.pulse
    J = ising_couplings(cfg.chain, _unit_pulse(cfg))
    instance = MaxCutInstance.from_couplings(J)
    cal = _calibration_from_config(cfg)
    gammas, betas = cfg.qaoa["gamma_axis"], cfg.qaoa["beta_axis"]
    shots, sampling = cfg.qaoa["shots"], cfg.qaoa["sampling"]

    ideal = heatmap_sweep(instance, gammas, betas, shots, sampling=sampling,
                          provenance="ideal_sim", seed=seed)
    gi, bi = ideal.argmax_pixel()
    g_star, b_star = float(gammas[gi]), float(betas[bi])
    r_star_ideal = float(ideal.values[gi, bi])

    noisy_pixel = heatmap_sweep(instance, [g_star], [b_star], shots,
                                sampling=sampling, provenance="noisy_sim",
                                config=cfg.chain, pulse_template=template,
                                noise=cfg.noise, calibration=cal, seed=seed)
    r_star = float(noisy_pixel.values[0, 0])

    def emit(grid, stem):
        if fmt == "csv":
            path = out_dir / f"{stem}.csv"
            write_heatmap_csv(path, grid)
        else:
            path = out_dir / f"{stem}.json"
            rows = [{"gamma": float(g), "beta": float(b),
                     "r": float(grid.values[gi_, bi_]),
                     "stderr": float(grid.stderr[gi_, bi_])}
                    for gi_, g in enumerate(grid.gamma_axis)
                    for bi_, b in enumerate(grid.beta_axis)]
            _write_json(path, rows)
        return str(path)

    outputs = [emit(ideal, "heatmap_ideal")]
    if full_sweep:
        noisy = heatmap_sweep(instance, gammas, betas, shots, sampling=sampling,
                              provenance="noisy_sim", config=cfg.chain,
                              pulse_template=template, noise=cfg.noise,
                              calibration=cal, seed=seed)
        outputs.append(emit(noisy, "heatmap_analog"))

    manifest = _manifest(cfg, "qaoa-heatmap", outputs, {
        "couplings_rad_per_s": J.tolist(),
        "weights": maxcut_weights(J).tolist(),
        "rabi_mp_hz": cal.rabi_mp / (2 * np.pi),
        "gamma_mp": cal.gamma_mp,
        "gamma_star_pixel": g_star,
        "beta_star_pixel": b_star,
        "r_star_ideal": r_star_ideal,
        "r_star": r_star,
        "r_star_ratio": r_star / r_star_ideal if r_star_ideal else None,
        "shots": shots,
        "sweep_seed": seed,
    })
    _write_json(out_dir / "heatmap_manifest.json", manifest)
    print(f"wrote {outputs[0]} (r*_ideal={r_star_ideal:.4f}, r*={r_star:.4f})")
    return 0


def _unit_pulse(cfg):
    return MSPulse(mu=cfg.pulse.mu, rabi=np.ones(cfg.chain.n),
                   duration=cfg.pulse.duration, target_mode=cfg.pulse.target_mode)


def cmd_compare(sim_path, data_path, out_path, config_path=None):
    exp = load_experiment_csv(data_path)
    sim = load_sim_csv(sim_path)
    if exp.kind == "ms":
        if not isinstance(sim, dict):
            raise DataMismatchError("experiment file is time-keyed but the "
                                    "simulation file is a heatmap")
        return _compare_ms(sim, exp, out_path)
    if isinstance(sim, dict):
        raise DataMismatchError("experiment file is a heatmap but the "
                                "simulation file is time-keyed")
    if config_path is None:
        raise ConfigError("heatmap comparison needs --config to rebuild the "
                          "cost spectrum from the chain and pulse")
    cfg = load_config(config_path)
    instance = MaxCutInstance.from_couplings(ising_couplings(cfg.chain, _unit_pulse(cfg)))
    return _compare_heatmap(sim, exp, instance, out_path)


def _compare_ms(sim, exp, out_path):
    sim_times = list(sim["times"])
    missing = [t for t in exp.keys if t not in sim_times]
    if missing:
        raise DataMismatchError(f"no simulated rows for times {missing[:5]}")
    if 2**exp.n != sim["probs"].shape[1]:
        raise DataMismatchError("bitstring column count mismatch")
    p_exp = exp.probabilities()
    points = []
    sims, exps, variances, labels = [], [], [], []
    for r, t in enumerate(exp.keys):
        k = sim_times.index(t)
        for z in range(2**exp.n):
            s = sim["probs"][k, z]
            var = sim["errs"][k, z] ** 2
            label = f"t={t!r}, z={sim['labels'][z]}"
            sims.append(s)
            exps.append(p_exp[r, z])
            variances.append(var)
            labels.append(label)
            points.append({"time_s": float(t), "state": sim["labels"][z],
                           "sim": float(s), "exp": float(p_exp[r, z]),
                           "residual": float(s - p_exp[r, z]),
                           "variance": float(var)})
    obs = ObservationSet(values=np.array(sims), exp_values=np.array(exps),
                         variances=np.array(variances), shots=int(exp.shots[0]),
                         labels=tuple(labels))
    report = {"kind": "ms", "n_points": len(points),
              "chi2_red": chi2_red(obs), "rmse": rmse(obs), "points": points}
    _write_json(out_path, report)
    print(f"chi2_red={report['chi2_red']:.4f} rmse={report['rmse']:.4e} "
          f"({len(points)} points)")
    return 0


def _compare_heatmap(sim, exp, instance, out_path):
    if 2**exp.n != instance.cost_values.shape[0]:
        raise DataMismatchError("bitstring column count does not match the chain")
    sim_keys = {(g, b): (gi, bi)
                for gi, g in enumerate(sim.gamma_axis)
                for bi, b in enumerate(sim.beta_axis)}
    missing = [tuple(k) for k in exp.keys if tuple(k) not in sim_keys]
    if missing:
        raise DataMismatchError(f"no simulated pixels for {missing[:5]}")
    span = instance.c_max - instance.c_min
    p_exp = exp.probabilities()
    points = []
    sims, exps, variances, labels = [], [], [], []
    for r, key in enumerate(map(tuple, exp.keys)):
        gi, bi = sim_keys[key]
        mean_c = float(p_exp[r] @ instance.cost_values)
        r_exp = (mean_c - instance.c_min) / span
        r_sim = float(sim.values[gi, bi])
        var = float(sim.stderr[gi, bi]) ** 2
        sims.append(r_sim)
        exps.append(r_exp)
        variances.append(var)
        labels.append(f"gamma={key[0]!r}, beta={key[1]!r}")
        points.append({"gamma": key[0], "beta": key[1], "sim": r_sim,
                       "exp": r_exp, "residual": r_sim - r_exp, "variance": var})
    obs = ObservationSet(values=np.array(sims), exp_values=np.array(exps),
                         variances=np.array(variances), shots=int(exp.shots[0]),
                         labels=tuple(labels))
    gi_s, bi_s = sim.argmax_pixel()
    star_key = (float(sim.gamma_axis[gi_s]), float(sim.beta_axis[bi_s]))
    star = next((p for p in points if (p["gamma"], p["beta"]) == star_key), None)
    report = {"kind": "heatmap", "n_points": len(points),
              "chi2_red": chi2_red(obs), "rmse": rmse(obs),
              "optimal_pixel": {"gamma": star_key[0], "beta": star_key[1],
                                "r_sim": float(sim.values[gi_s, bi_s]),
                                "r_exp": None if star is None else star["exp"]},
              "points": points}
    _write_json(out_path, report)
    print(f"chi2_red={report['chi2_red']:.4f} rmse={report['rmse']:.4e} "
          f"({len(points)} points)")
    return 0


def cmd_fit_spam(data_path, out_path):
    matrix = np.loadtxt(data_path, delimiter=",", ndmin=2)
    fit = fit_bitflip_epsilon(matrix)
    report = {"eps": fit.eps, "trace_norm_distance": fit.trace_norm_distance,
              "abs_diff_eps": fit.abs_diff_eps,
              "abs_diff_distance": fit.abs_diff_distance, "n": fit.n}
    _write_json(out_path, report)
    print(f"eps={fit.eps:.4f} trace_norm_distance={fit.trace_norm_distance:.4f}")
    return 0


def cmd_calibrate(cfg, out_dir):
    if cfg.pulse is None:
        raise ConfigError("calibrate needs a pulse section")
    cal = _calibration_from_config(cfg)
    payload = {
        "mode": cal.mode,
        "n_loops": cal.n_loops,
        "gamma_star": cal.gamma_star,
        "gamma_mp": cal.gamma_mp,
        "rabi_mp_hz": cal.rabi_mp / (2 * np.pi),
        "beta_star": cal.beta_star,
        "scan": None if cal.scan_gammas is None else {
            "gamma": cal.scan_gammas.tolist(),
            "value": cal.scan_values.tolist(),
        },
    }
    out_path = out_dir / "calibration.json"
    _write_json(out_path, _manifest(cfg, "calibrate", [str(out_path)],
                                    {"calibration": payload}))
    print(f"rabi_mp = {payload['rabi_mp_hz']:.1f} Hz, gamma_mp = {cal.gamma_mp:.4f}")
    return 0


def cmd_verify(cfg, out_dir):
    """Hidden: spot-check the analytic channel against the Fock-space build."""
    if cfg.pulse is None:
        raise ConfigError("verify needs a pulse section")
    rng = np.random.default_rng(cfg.seed)
    tl = loop_time(cfg.pulse, cfg.chain)
    worst = 0.0
    for nbar in (0.0, 0.5):
        for _ in range(3):
            t = rng.uniform(0.1, 3.0) * tl
            exact = reduced_density(zero_state_x_amplitudes(cfg.chain.n),
                                    cfg.chain, cfg.pulse, t, nbars=nbar)
            brute = fock_reduced_density(zero_state_x_amplitudes(cfg.chain.n),
                                         cfg.chain, cfg.pulse, t, nbars=nbar)
            td = trace_distance(exact, brute)
            worst = max(worst, td)
            print(f"nbar={nbar} t={t:.3e}s trace_distance={td:.3e}")
    if worst > 1e-5:
        raise NumericsError(f"verification failed: trace distance {worst:.3e}")
    print("ok")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="mssim",
                                description="Trapped-ion entangling-drive and "
                                            "analog-QAOA simulator")
    p.add_argument("--version", action="version", version=__version__)
    # verify is a debugging command; keep it out of the advertised choices.
    sub = p.add_subparsers(dest="command", required=True,
                           metavar="{simulate-ms,qaoa-heatmap,compare,fit-spam,calibrate}")

    def add_common(sp, needs_config=True):
        if needs_config:
            sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--seed", type=int, default=None, help="override config seed")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--threads", type=int, default=None,
                        help="compute threads for the compiled kernels")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    add_common(sub.add_parser("simulate-ms", help="populations vs time under the drive"))
    hm = sub.add_parser("qaoa-heatmap", help="approximation-ratio landscape sweep")
    add_common(hm)
    hm.add_argument("--full-sweep", action="store_true",
                    help="also sweep the noisy analog pipeline over the full grid")
    cmp_p = sub.add_parser("compare", help="chi-squared / RMSE report vs experiment")
    cmp_p.add_argument("--sim", required=True, help="simulation CSV")
    cmp_p.add_argument("--data", required=True, help="experiment CSV")
    cmp_p.add_argument("--config", default=None,
                       help="run configuration (required for heatmap comparisons)")
    cmp_p.add_argument("--out", default="compare_report.json")
    fs = sub.add_parser("fit-spam", help="fit an independent bit-flip SPAM model")
    fs.add_argument("--data", required=True, help="2^n x 2^n CSV confusion matrix")
    fs.add_argument("--out", default="spam_fit.json")
    add_common(sub.add_parser("calibrate", help="infer max-power angle and Rabi rate"))
    add_common(sub.add_parser("verify"))
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            return cmd_compare(args.sim, args.data, args.out, args.config)
        if args.command == "fit-spam":
            return cmd_fit_spam(args.data, args.out)
        if getattr(args, "threads", None):
            if USE_NUMBA:
                import numba
                numba.set_num_threads(args.threads)
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = type(cfg)(chain=cfg.chain, pulse=cfg.pulse, noise=cfg.noise,
                            qaoa=cfg.qaoa, ms=cfg.ms, seed=args.seed, raw=cfg.raw)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate-ms":
            return cmd_simulate_ms(cfg, out_dir, args.format)
        if args.command == "qaoa-heatmap":
            return cmd_qaoa_heatmap(cfg, out_dir, args.format, args.full_sweep)
        if args.command == "calibrate":
            return cmd_calibrate(cfg, out_dir)
        if args.command == "verify":
            return cmd_verify(cfg, out_dir)
        raise ConfigError(f"unknown command {args.command}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except DataMismatchError as exc:
        print(f"data mismatch: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
