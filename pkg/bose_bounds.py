"""bose_bounds.py

    Batch entry point: scattering lengths, Neumann and torus eigensolves,
    admissible-coupling certificates, lower-bound evaluation and the
    desk-scale verification runs, each written as a JSON (or CSV) report.

    ====================================================================

    This file is part of Bose Bounds.

    Copyright (C) 2026 The Bose Bounds developers

    Bose Bounds is free software: you can redistribute it and/or
    modify it under the terms of the GNU General Public License as
    published by the Free Software Foundation, either version 3 of the
    License, or any later version.

    This program is distributed in the hope that it will be useful,
    but WITHOUT ANY WARRANTY; without even the implied warranty of
    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
    GNU General Public License for more details.

    You should have received a copy of the GNU General Public License
    along with this program.  If not, see <https://www.gnu.org/licenses/>.

    ====================================================================

"""

# Imports

import argparse
import io
import json
import logging
import sys
from dataclasses import asdict

import numpy as np

from bose_code import __version__
from bose_code.acceptance import (
    BUDGETS,
    check_lemma4,
    check_lemma5,
    check_partition,
    run_suite,
)
from bose_code.certificate import (
    CertificateReport,
    bounds_sweep,
    build_certificate,
    deficit_exponent,
    evaluate_bounds,
    inclusion_exclusion_count,
    probe_stability,
)
from bose_code.common_utils import (
    BoseBoundsError,
    HypothesisViolated,
    PointwiseViolation,
)
from bose_code.config import THREADS
from bose_code.perturbation import replay_trial, verify_perturbation_lemma
from bose_code.potential import (
    CompositePotential,
    load_pair,
    pair_content_hash,
    require_valid,
    validate_pair,
)
from bose_code.scattering import scattering_length_sweep, solve_zero_energy
from bose_code.spectral import (
    box_neumann_3d_ground,
    neumann_ball_ground,
    torus_sweep,
    two_body_box_ground,
    two_body_torus_ground,
)

logger = logging.getLogger("bose_bounds")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_VERIFICATION_FAILED = 2

PAIR_SCHEMA = """\
Potential pair files are JSON of the form
  {"v1": {"pieces": [{"lo": 0, "hi": 1, "coeffs": [8]}]},
   "v2": {"pieces": [{"lo": 1, "hi": 2, "coeffs": [1]}]},
   "r0": 1, "r1": 2}
with coeffs the polynomial coefficients in r, lowest degree first,
v1 vanishing beyond r0 and v2 vanishing outside [r0, r1]."""

DEFAULT_GRID = {"ball": 4000, "torus": 64, "box3": 64, "box6": 8}


class BoseArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with status 1 and show the pair file schema."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{PAIR_SCHEMA}\n")
        sys.exit(EXIT_INPUT_ERROR)


########################################################################
#                                                                      #
#                            REPORT OUTPUT                             #
#                                                                      #
########################################################################


def _floats(text, name):
    """Comma separated floats, optionally written as name=a,b,c."""
    if "=" in text:
        prefix, text = text.split("=", 1)
        if prefix.strip() != name:
            raise ValueError(f"expected {name}=a,b,... but got {prefix.strip()}=")
    return [float(item) for item in text.split(",") if item.strip()]



def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"cannot serialise {type(value).__name__}")


def report_header(config):
    settings = {
        key: value for key, value in sorted(vars(config).items()) if not callable(value)
    }
    header = {"config": settings, "version": __version__}
    pair_path = getattr(config, "pair", None)
    if pair_path:
        header["pair_sha256"] = pair_content_hash(pair_path)
    return header


def write_report(config, report, rows=None, columns=None):
    """JSON with a reproducibility header, or CSV rows through numpy.savetxt."""
    if config.format == "csv":
        if rows is None:
            raise ValueError(f"command {config.command} has no tabular output, use --format json")
        buffer = io.StringIO()
        np.savetxt(buffer, np.asarray(rows, dtype=float), delimiter=",",
                   header=",".join(columns), comments="", fmt="%.17g")
        text = buffer.getvalue()
    else:
        payload = {"header": report_header(config), "report": report}
        text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n"

    if config.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(config.out, "w") as out_file:
            out_file.write(text)
        logger.info(f"report written to {config.out}")


########################################################################
#                                                                      #
#                              COMMANDS                                #
#                                                                      #
########################################################################

# Each command returns (report, rows, columns); rows are None for JSON-only output.


def _pair(config):
    pair = load_pair(config.pair)
    # step potentials are accepted with a logged warning
    validate_pair(pair)
    return pair


def scattering_command(config):
    pair = _pair(config)
    solution = solve_zero_energy(CompositePotential(pair, config.lam), half=config.half)
    report = {"lambda": config.lam, **solution.to_dict()}
    return report, solution.f_samples, ("r", "f")


def eig_command(config):
    pair = _pair(config)
    v = CompositePotential(pair, config.lam)
    n = config.n or DEFAULT_GRID[config.kind]
    if config.sweep:
        if config.kind != "torus":
            raise ValueError("extent sweeps are only available for --kind torus")
        rows = torus_sweep(v, _floats(config.sweep, "extent"), n, threads=config.threads)
        report = [dict(zip(("extent", "energy", "ratio"), row)) for row in rows]
        return report, rows, ("extent", "energy", "ratio_to_8pi_a_over_extent3")
    if config.kind == "ball":
        result = neumann_ball_ground(v, config.extent, n, k=config.k)
    elif config.kind == "torus":
        result = two_body_torus_ground(v, config.extent, n, k=config.k)
    elif config.kind == "box3":
        result = box_neumann_3d_ground(v, config.extent, n, k=config.k)
    else:
        result = two_body_box_ground(v, config.extent, n, k=config.k)
    return result.to_dict(), None, None


def certify_command(config):
    pair = _pair(config)
    report = {}
    stability_constant = config.B
    if config.probe_B:
        estimate = probe_stability(
            pair, config.nmax, config.budget, config.seed, config.restarts, config.threads
        )
        stability_constant = estimate.B_hat
        report["stability"] = estimate.to_dict()
    certificate = build_certificate(pair, stability_constant, config.kappa)
    report.update(certificate.to_dict())
    return report, None, None


def _load_certificate(path):
    with open(path, "r") as cert_file:
        data = json.load(cert_file)
    # accept either a bare certificate or a certify report with its header
    return CertificateReport.from_dict(data.get("report", data))


def bounds_command(config):
    certificate = _load_certificate(config.cert)
    if config.sweep_rho:
        rhos = _floats(config.sweep_rho, "rho")
        rows = bounds_sweep(certificate, rhos, config.epsilon, config.N, config.c_prime)
        report = {"rows": [dict(zip(("rho", "bound", "ratio"), row)) for row in rows]}
        if len(rhos) >= 2 and all(ratio < 1 for _, _, ratio in rows):
            exponent = deficit_exponent(certificate, rhos, config.epsilon, config.N, config.c_prime)
            logger.info(f"Deficit 1 - bound / (4 pi a rho N) ~ rho^{exponent:.4f}, epsilon = {config.epsilon}")
            report["deficit_exponent"] = exponent
        return report, rows, ("rho", "bound", "ratio_to_4pi_a_rho_N")
    evaluation = evaluate_bounds(
        certificate, config.rho, config.epsilon, config.N, config.c_prime
    )
    return evaluation.to_dict(), None, None


def ie_count_command(config):
    count = inclusion_exclusion_count(
        config.k, config.ell1, config.ell2, config.samples, config.seed
    )
    report = count.to_dict()
    if config.samples:
        report["passed"] = bool(count.pairs_agree and count.triples_agree)
    return report, None, None


def stability_command(config):
    pair = _pair(config)
    estimate = probe_stability(
        pair, config.nmax, config.budget, config.seed, config.restarts, config.threads
    )
    per_particle = sorted(estimate.per_particle.items())
    return estimate.to_dict(), per_particle, ("n", "energy_per_particle")


def sweep_command(config):
    pair = _pair(config)
    require_valid(pair)
    rows = scattering_length_sweep(pair, _floats(config.lambdas, "lambda"), config.half, config.threads)
    report = [dict(zip(("lambda", "a", "w_positive"), row)) for row in rows]
    return report, rows, ("lambda", "a", "w_positive")


def verify_perturb_command(config):
    if config.replay:
        with open(config.replay, "r") as witness_file:
            witnesses = json.load(witness_file)
        if isinstance(witnesses, dict):
            witnesses = witnesses.get("violating_trials", [witnesses])
        results = [replay_trial(witness) for witness in witnesses]
        return (
            {
                "replayed": [asdict(result) for result in results],
                "passed": not any(result.violated for result in results),
            },
            None,
            None,
        )
    report = verify_perturbation_lemma(
        config.trials, config.dim, config.seed, config.x_fraction, threads=config.threads
    )
    return report.to_dict(), None, None


def verify_partition_command(config):
    pair = _pair(config) if config.pair else None
    report = check_partition(
        seed=config.seed,
        threads=config.threads,
        pair=pair,
        cell=config.cell,
        samples=config.samples,
        points=config.points,
        delta=config.delta,
    )
    return report, None, None


def verify_lemma4_command(config):
    pair = _pair(config) if config.pair else None
    return check_lemma4(pair, config.lam, config.n, config.threads), None, None


def verify_lemma5_command(config):
    v = CompositePotential(_pair(config), config.lam) if config.pair else None
    extents = _floats(config.extents, "extent") if config.extents else None
    report = check_lemma5(config.budget, config.threads, v, extents)
    rows = [(row["extent"], row["energy"], row["ratio"]) for row in report["torus"]]
    return report, rows, ("extent", "energy", "ratio_to_8pi_a_over_extent3")


def verify_all_command(config):
    return verify_all(config.seed, config.budget, config.threads), None, None


########################################################################
#                                                                      #
#                      MAIN CALLING FUNCTION                           #
#                                                                      #
########################################################################


def verify_all(seed, budget="quick", threads=None):
    """Runs the acceptance suite and aggregates pass/fail per criterion."""
    suite = run_suite(seed, budget, threads)
    suite["passed_all"] = suite.pop("all_passed")
    return suite


def _verification_passed(report):
    if isinstance(report, dict):
        return report.get("passed_all", report.get("passed", True)) is not False
    return True


def run(config):
    """Dispatches one parsed configuration and returns the exit status."""
    try:
        report, rows, columns = config.func(config)
        write_report(config, report, rows, columns)
    except PointwiseViolation as err:
        logger.error(f"inequality violated at r = {err.radius}: {err}")
        return EXIT_VERIFICATION_FAILED
    except HypothesisViolated as err:
        logger.error(f"hypothesis violated: {err}")
        return EXIT_INPUT_ERROR
    except (BoseBoundsError, OSError, ValueError, KeyError) as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_INPUT_ERROR

    if not _verification_passed(report):
        logger.error("verification failed, see the report for the witnessing instances")
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


########################################################################
#                                                                      #
#                            CLI HANDLER                               #
#                                                                      #
########################################################################


def cli_handler(args):  # pylint: disable=redefined-outer-name

    loglevel = logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(
        format="%(asctime)s %(levelname)s: %(message)s",
        datefmt="%H:%M:%S",
        level=loglevel,
    )
    logging.debug("Debugging level for log messages set.")
    return run(args)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=THREADS, help="worker threads")
    common.add_argument("--verbose", action="store_true", help="get more info printed")
    common.add_argument("--seed", type=int, default=0, help="seed of every random stage")
    common.add_argument("--out", default=None, help="report path, stdout by default")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    parser = BoseArgumentParser(
        prog="bose-bounds",
        description="Constants and checks for lower bounds on dilute Bose gas energies.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    scattering = commands.add_parser("scattering", parents=[common], help="scattering length of V1 - lambda V2")
    scattering.add_argument("--pair", required=True)
    scattering.add_argument("--lambda", dest="lam", type=float, default=0.0)
    scattering.add_argument("--half", action="store_true", help="solve -f'' + V f / 2 = 0")
    scattering.set_defaults(func=scattering_command)

    eig = commands.add_parser("eig", parents=[common], help="ground energies on Neumann and periodic domains")
    eig.add_argument("--kind", choices=sorted(DEFAULT_GRID), required=True)
    eig.add_argument("--pair", required=True)
    eig.add_argument("--lambda", dest="lam", type=float, default=0.0)
    eig.add_argument("--extent", type=float, default=None, help="ball radius, torus or box side")
    eig.add_argument("--n", type=int, default=None, help="grid points (per axis)")
    eig.add_argument("--k", type=int, default=1, help="number of eigenvalues")
    eig.add_argument("--sweep", default=None, help="comma separated torus sides, as 4,6,8 or extent=4,6,8; CSV rows")
    eig.set_defaults(func=eig_command)

    certify = commands.add_parser("certify", parents=[common], help="admissible coupling certificate")
    certify.add_argument("--pair", required=True)
    stability_source = certify.add_mutually_exclusive_group()
    stability_source.add_argument("--B", type=float, default=0.0, help="stability constant")
    stability_source.add_argument("--probe-B", dest="probe_B", action="store_true",
                                  help="use the probed lower estimate of B (not a proof)")
    certify.add_argument("--nmax", type=int, default=12)
    certify.add_argument("--budget", type=int, default=2000, help="annealing sweeps per restart")
    certify.add_argument("--restarts", type=int, default=50)
    certify.add_argument("--kappa", type=float, default=10.0)
    certify.set_defaults(func=certify_command)

    bounds = commands.add_parser("bounds", parents=[common], help="lower bound for a certificate")
    bounds.add_argument("--cert", required=True, help="certificate JSON written by certify")
    bounds.add_argument("--rho", type=float, default=1e-4)
    bounds.add_argument("--epsilon", type=float, default=0.03)
    bounds.add_argument("--N", type=float, default=1e6)
    bounds.add_argument("--c-prime", dest="c_prime", type=float, default=1.0)
    bounds.add_argument("--sweep-rho", dest="sweep_rho", default=None,
                        help="comma separated densities, as 1e-3,1e-4 or rho=1e-3,1e-4; CSV rows")
    bounds.set_defaults(func=bounds_command)

    ie_count = commands.add_parser("ie-count", parents=[common], help="inclusion-exclusion occupancy count")
    ie_count.add_argument("--k", type=int, required=True)
    ie_count.add_argument("--ell1", type=float, required=True)
    ie_count.add_argument("--ell2", type=float, required=True)
    ie_count.add_argument("--samples", type=int, default=0, help="Monte Carlo samples")
    ie_count.set_defaults(func=ie_count_command)

    stability = commands.add_parser("stability", parents=[common], help="stability constant lower estimate")
    stability.add_argument("--pair", required=True)
    stability.add_argument("--nmax", type=int, default=12)
    stability.add_argument("--budget", type=int, default=2000)
    stability.add_argument("--restarts", type=int, default=50)
    stability.set_defaults(func=stability_command)

    sweep = commands.add_parser("sweep", parents=[common], help="scattering length over couplings")
    sweep.add_argument("--pair", required=True)
    sweep.add_argument("--lambdas", required=True, help="comma separated couplings")
    sweep.add_argument("--half", action="store_true")
    sweep.set_defaults(func=sweep_command)

    verify = commands.add_parser("verify", help="desk-scale verification runs")
    checks = verify.add_subparsers(dest="check", required=True)

    perturb = checks.add_parser("perturb", parents=[common], help="fuzz the gap perturbation bound")
    perturb.add_argument("--trials", type=int, default=1000)
    perturb.add_argument("--dim", type=int, default=100)
    perturb.add_argument("--x-fraction", dest="x_fraction", type=float, default=0.25,
                         help="x_inf as a fraction of the gap, at most 1/4")
    perturb.add_argument("--replay", default=None, help="witness JSON of a failing trial")
    perturb.set_defaults(func=verify_perturb_command)

    partition = checks.add_parser("partition", parents=[common], help="partition of unity checks")
    partition.add_argument("--pair", default=None)
    partition.add_argument("--cell", type=float, default=4.0)
    partition.add_argument("--samples", type=int, default=10 ** 4)
    partition.add_argument("--points", type=int, default=256, help="u-quadrature points per axis")
    partition.add_argument("--delta", type=float, default=0.5)
    partition.set_defaults(func=verify_partition_command)

    lemma4 = checks.add_parser("lemma4", parents=[common], help="Neumann ball against 3a / l0^3")
    lemma4.add_argument("--pair", default=None)
    lemma4.add_argument("--lambda", dest="lam", type=float, default=None)
    lemma4.add_argument("--n", type=int, default=4000)
    lemma4.set_defaults(func=verify_lemma4_command)

    lemma5 = checks.add_parser("lemma5", parents=[common], help="two-body torus against 8 pi a / L^3")
    lemma5.add_argument("--pair", default=None)
    lemma5.add_argument("--lambda", dest="lam", type=float, default=0.0)
    lemma5.add_argument("--extents", default=None, help="comma separated torus sides")
    lemma5.add_argument("--budget", choices=sorted(BUDGETS), default="quick")
    lemma5.set_defaults(func=verify_lemma5_command)

    everything = checks.add_parser("all", parents=[common], help="the whole acceptance suite")
    everything.add_argument("--budget", choices=sorted(BUDGETS), default="quick")
    everything.set_defaults(func=verify_all_command)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "kind", None) and args.extent is None and not args.sweep:
        build_parser().error("eig needs --extent unless --sweep is given")
    sys.exit(cli_handler(args))


if __name__ == "__main__":
    main()
