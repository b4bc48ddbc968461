"""
Command line tools.

ipmhull classify STATE           region of a state
ipmhull decompose STATE          laminate tree of a hull point
ipmhull separate STATE           separator values, convexity along sampled lines with --verify
ipmhull wave-cone [STATE]        wave cone check, or samples with --count
ipmhull hull-approx              grow a cloud and write it as CSV
ipmhull audit FIELD              audit a stationary field
ipmhull time-bound SERIES        infinite time energy bound of a series

STATE is a path, "-" for stdin or inline JSON. Results go to stdout (or
--out), summaries and logging to stderr. Exit codes: 0 success, 1 failed
verification, 2 usage or input error.
"""
import argparse
import logging
import sys

from pathlib import Path
from typing import Optional

import numpy as np

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import TypeAdapter
from pydantic import ValidationError

from ipmhull.config import RunConfig
from ipmhull.config import loadRunConfig
from ipmhull.core.errors import ConfigError
from ipmhull.core.errors import FieldError
from ipmhull.core.errors import MalformedTreeError
from ipmhull.core.errors import PreconditionError
from ipmhull.core.states import State
from ipmhull.core.states import inWaveCone
from ipmhull.core.states import planeWaveResiduals
from ipmhull.core.states import recoverCovector
from ipmhull.core.states import sampleWaveCone
from ipmhull.core.states import waveConeResiduals
from ipmhull.datasource.fieldLoader import loadField
from ipmhull.datasource.fieldLoader import loadSeries
from ipmhull.datasource.fieldLoader import writeCloudCsv
from ipmhull.hull.hullApprox import containmentReport
from ipmhull.hull.hullApprox import growCloud
from ipmhull.hull.laminates import decompose
from ipmhull.hull.laminates import verifyTree
from ipmhull.hull.regions import classify
from ipmhull.hull.separators import SeparatorId
from ipmhull.hull.separators import checkConvexAlong
from ipmhull.hull.separators import separationBound
from ipmhull.subsolution.audit import auditStationary
from ipmhull.subsolution.timeSeries import fOfT
from ipmhull.subsolution.timeSeries import infiniteTimeBound
from ipmhull.utils import Vec2
from ipmhull.utils import cleanNumber

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

_STATE_LIST = TypeAdapter(list[State])


class WaveConeCheck(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    member: bool = Field(alias="in_wave_cone")
    residuals: tuple[float, float, float]
    xi: Optional[Vec2] = None
    """ Plane-wave covector, for states in the wave cone """
    planeResiduals: Optional[tuple[float, float, float]] = Field(
        default=None, alias="plane_wave_residuals")


def _readText(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    if source.lstrip().startswith("{"):
        return source
    return Path(source).read_text()


def _readState(source: str) -> State:
    return State.model_validate_json(_readText(source))


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _dump(model: BaseModel) -> str:
    return model.model_dump_json(by_alias=True, indent=2)


def cmdClassify(args: argparse.Namespace, config: RunConfig) -> int:
    _emit(_dump(classify(_readState(args.input), config.tolerance)), args.out)
    return EXIT_OK


def cmdDecompose(args: argparse.Namespace, config: RunConfig) -> int:
    tree = decompose(_readState(args.input), config.tolerance)
    _emit(_dump(tree), args.out)
    if tree.certifiedOnly:
        print(tree.note, file=sys.stderr)
    if not args.verify:
        return EXIT_OK
    report = verifyTree(tree, config.tolerance)
    print(_dump(report), file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmdSeparate(args: argparse.Namespace, config: RunConfig) -> int:
    tol = config.tolerance
    z = _readState(args.input)
    _emit(_dump(separationBound(z, tol)), args.out)
    if not args.verify:
        return EXIT_OK

    # every separator along sampled wave cone lines through the state
    ts = np.linspace(-1.0, 1.0, config.convexity.samples)
    directions = sampleWaveCone(config.sampling.seed, config.sampling.count)
    checks = 0
    failures = 0
    for direction in directions:
        for which in SeparatorId:
            checks += 1
            if not checkConvexAlong(which, z, direction, ts, tol).passed:
                failures += 1
    print(f"{failures} of {checks} convexity checks fail", file=sys.stderr)
    return EXIT_OK if failures == 0 else EXIT_FAILED


def cmdWaveCone(args: argparse.Namespace, config: RunConfig) -> int:
    tol = config.tolerance
    if args.count is not None or args.input is None:
        count = args.count if args.count is not None else config.sampling.count
        states = sampleWaveCone(config.sampling.seed, count)
        _emit(_STATE_LIST.dump_json(states, indent=2).decode(), args.out)
        if not args.verify:
            return EXIT_OK
        failures = sum(1 for z in states if not inWaveCone(z, tol))
        print(f"{failures} of {len(states)} samples fail the wave cone test", file=sys.stderr)
        return EXIT_OK if failures == 0 else EXIT_FAILED

    z = _readState(args.input)
    member = inWaveCone(z, tol)
    xi = recoverCovector(z, tol) if member else None
    check = WaveConeCheck(member=member,
                          residuals=waveConeResiduals(z),
                          xi=xi,
                          planeResiduals=planeWaveResiduals(z, xi) if member else None)
    _emit(_dump(check), args.out)
    if args.verify and not member:
        return EXIT_FAILED
    return EXIT_OK


def cmdHullApprox(args: argparse.Namespace, config: RunConfig) -> int:
    tol = config.tolerance
    cloud = growCloud(config.cloud, tol)
    if args.out:
        with open(args.out, "w", newline="") as f:
            writeCloudCsv(cloud, f, tol)
    else:
        writeCloudCsv(cloud, sys.stdout, tol)
    report = containmentReport(cloud, tol)
    for tag, count in report.perRegion.items():
        share = 100.0 * count / max(report.total, 1)
        print(f"{tag.value:8} {count:8d} {cleanNumber(share, 2)}%", file=sys.stderr)
    for mode, count in report.perMode.items():
        print(f"{mode.value:10} {count:8d} points, {report.violationsPerMode[mode]} outside",
              file=sys.stderr)
    print(f"{report.total} points, {len(report.violations)} outside the hull", file=sys.stderr)
    return EXIT_OK if not report.violations else EXIT_FAILED


def cmdAudit(args: argparse.Namespace, config: RunConfig) -> int:
    field = loadField(args.input, config.tolerance)
    report = auditStationary(field, config.tolerance)
    _emit(_dump(report), args.out)
    print(f"v_energy {report.vEnergy:.6g} <= certified bound {report.certifiedBound:.6g}: "
          f"{report.passed}",
          file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmdTimeBound(args: argparse.Namespace, config: RunConfig) -> int:
    series = loadSeries(args.input, config.tolerance)
    report = infiniteTimeBound(series, config.tolerance, config.audit.rhoSup)
    _emit(_dump(report), args.out)
    print(f"F(t) reconstruction discrepancy {fOfT(series).maxDiscrepancy:.3g}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAILED


def buildParser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--tol", type=float, help="equality tolerance")
    common.add_argument("--seed", type=int, help="seed for sampling and cloud growth")
    common.add_argument("--verify", action="store_true", help="verify the result")
    common.add_argument("-v",
                        "--verbose",
                        action="count",
                        default=0,
                        help="-v for progress, -vv for debugging output")

    parser = argparse.ArgumentParser(prog="ipmhull",
                                     description="Lamination hull tools for stationary IPM")
    commands = parser.add_subparsers(dest="name", required=True)

    for name, command, helpText in (("classify", cmdClassify, "region of a state"),
                                     ("decompose", cmdDecompose, "laminate tree of a state"),
                                     ("separate", cmdSeparate, "separator values of a state")):
        sub = commands.add_parser(name, parents=[common], help=helpText)
        sub.add_argument("input", help="state JSON: a path, - for stdin or inline JSON")
        sub.set_defaults(command=command)

    sub = commands.add_parser("wave-cone", parents=[common], help="wave cone check or samples")
    sub.add_argument("input", nargs="?", help="state JSON to check")
    sub.add_argument("--count", type=int, help="emit this many seeded samples")
    sub.set_defaults(command=cmdWaveCone)

    sub = commands.add_parser("hull-approx", parents=[common], help="grow a hull cloud")
    sub.set_defaults(command=cmdHullApprox)

    sub = commands.add_parser("audit", parents=[common], help="audit a stationary field")
    sub.add_argument("input", help="field header JSON")
    sub.set_defaults(command=cmdAudit)

    sub = commands.add_parser("time-bound", parents=[common], help="time bound of a series")
    sub.add_argument("input", help="series manifest JSON")
    sub.set_defaults(command=cmdTimeBound)
    return parser


def _configureLogging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(stream=sys.stderr,
                        level=level,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def main(argv: Optional[list[str]] = None) -> int:
    args = buildParser().parse_args(argv)
    _configureLogging(args.verbose)
    try:
        config = loadRunConfig(args.config).withOverrides(args.tol, args.seed)
        logger.debug("running %s", args.name)
        return args.command(args, config)
    except PreconditionError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAILED
    except (ValidationError, ConfigError, FieldError, MalformedTreeError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
