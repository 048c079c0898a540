from __future__ import annotations
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from src.core.settings import get_settings
from src.core.logging_config import configure_logging
from src.core.services.storage import dumps, write_json
from src.cli.DTOs import (
    CoefficientsDTO,
    CongruenceDTO,
    EscapeReportDTO,
    IndexReportDTO,
    IndexRowDTO,
    MapDumpDTO,
    RunConfig,
    SeparationReportDTO,
    SeparationRowDTO,
    StreamsDTO,
    WordCheckDTO,
    WordsReportDTO,
    to_json_dict,
)
from src.cli.errors import (
    ERR_CONGRUENCE,
    ERR_DISAGREEMENT,
    ERR_FILE_NOT_FOUND,
    ERR_INVALID_CONFIG,
    ERR_INVALID_LITERAL,
    ERR_MAP_DUMP,
    ERR_NOT_PRIMITIVE,
    ERR_REFINEMENT,
    ERR_WORD_CHECK,
)
from src.core.services.algebra.dold_core import (
    DoldCoefficients,
    DoldCongruenceError,
    InvalidLiteralError,
    check_congruences,
    expand,
    format_coefficients,
    invert,
    parse_coefficients,
    parse_index,
)
from src.core.services.words.word_lab import (
    NonPrimitiveWordError,
    build_A,
    conjugates,
    ptm_prefix,
    scan_circular,
    scan_cube_free,
    scan_primitive,
)
from src.core.services.circle.orbit_space import separation_proxy
from src.core.services.maps.map_builder import build_map, escape_scan
from src.core.services.maps.map_store import MapDumpError, load_map, map_to_payload, save_map
from src.core.services.index.index_engine import (
    IndexReport,
    WindingIntegralityError,
    WindingRefinementError,
    verify,
)

logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONGRUENCE = 2
EXIT_CONSTRUCTION = 3
# argparse also exits 2 on usage errors
EXIT_USAGE = 2

WORD_CHECKS = ("cube-free", "circular6", "primitive")


def _emit(payload, out: Optional[str]):
    """JSON to stdout, and to --out when given."""
    data = to_json_dict(payload)
    sys.stdout.write(dumps(data))
    path = write_json(data, out)
    if path is not None:
        logger.info("report written to %s", path)


def _coefficients(cfg: RunConfig) -> DoldCoefficients:
    """
    Coefficients from --coeffs, or by inverting --index.

    Raises:
        InvalidLiteralError, DoldCongruenceError
    """
    if cfg.coeffs is not None:
        return parse_coefficients(cfg.coeffs)
    return invert(parse_index(cfg.index))


def _report_dto(report: IndexReport) -> IndexReportDTO:
    return IndexReportDTO(
        coefficients=format_coefficients(report.coeffs),
        N=report.N,
        agree=report.agree,
        rows=[
            IndexRowDTO(
                n=r.n,
                numeric=r.numeric,
                combinatorial=r.combinatorial,
                target=r.target,
                agree=r.agree,
                samples=r.samples,
                depth=r.depth,
                curve=None if r.curve is None else [list(c) for c in r.curve],
            )
            for r in report.rows
        ],
    )


def run_realize(cfg: RunConfig) -> int:
    """
    Build the map and verify the three indices for n ≤ max-n.

    Exit:
        0 all agree, 1 disagreement or uncertified winding, 2 congruence, 3 construction
    """
    try:
        coeffs = _coefficients(cfg)
    except DoldCongruenceError as e:
        logger.error(ERR_CONGRUENCE.format(n=e.n, residue=e.residue))
        return EXIT_CONGRUENCE
    except InvalidLiteralError as e:
        logger.error(ERR_INVALID_LITERAL.format(err=e))
        return EXIT_USAGE

    max_n = cfg.max_n
    if max_n is None:
        max_n = len(parse_index(cfg.index)) if cfg.index is not None else 8

    try:
        report = verify(
            coeffs,
            max_n,
            max_depth=cfg.max_depth,
            per_subsector=cfg.samples,
            keep_curve=cfg.dump_curve,
            n_jobs=cfg.n_jobs,
        )
    except NonPrimitiveWordError as e:
        logger.error(ERR_NOT_PRIMITIVE.format(err=e))
        return EXIT_CONSTRUCTION
    except (WindingRefinementError, WindingIntegralityError) as e:
        logger.error(ERR_REFINEMENT.format(err=e))
        return EXIT_FAILED

    logger.info("index report\n%s", report.to_frame().to_string())
    _emit(_report_dto(report), cfg.out)
    for r in report.rows:
        if not r.agree:
            logger.error(ERR_DISAGREEMENT.format(
                n=r.n, numeric=r.numeric, combinatorial=r.combinatorial, target=r.target
            ))
    return EXIT_OK if report.agree else EXIT_FAILED


def run_validate(cfg: RunConfig) -> int:
    """Congruence check of --index, or of expand(--coeffs) up to max-n."""
    try:
        if cfg.index is not None:
            seq = parse_index(cfg.index)
        else:
            seq = expand(parse_coefficients(cfg.coeffs), cfg.max_n or 8)
    except InvalidLiteralError as e:
        logger.error(ERR_INVALID_LITERAL.format(err=e))
        return EXIT_USAGE

    verdict = check_congruences(seq)
    _emit(CongruenceDTO(index=list(seq.values), ok=verdict.ok, n=verdict.n, residue=verdict.residue), cfg.out)
    if not verdict.ok:
        logger.error(ERR_CONGRUENCE.format(n=verdict.n, residue=verdict.residue))
        return EXIT_CONGRUENCE
    return EXIT_OK


def run_invert(cfg: RunConfig) -> int:
    try:
        coeffs = invert(parse_index(cfg.index))
    except InvalidLiteralError as e:
        logger.error(ERR_INVALID_LITERAL.format(err=e))
        return EXIT_USAGE
    except DoldCongruenceError as e:
        logger.error(ERR_CONGRUENCE.format(n=e.n, residue=e.residue))
        return EXIT_CONGRUENCE

    literal = format_coefficients(coeffs)
    logger.info("coefficients %s", literal or "-")
    _emit(CoefficientsDTO(coefficients=literal, entries={str(k): a for k, a in coeffs.items()}), cfg.out)
    return EXIT_OK


def run_words(cfg: RunConfig) -> int:
    """
    Thue–Morse scans up to --n-max, or one of the lookup modes
    (--conjugates, --prefix, --dump-a), which print plain literals or JSON.
    """
    if cfg.conjugates is not None:
        try:
            print(",".join(conjugates(cfg.conjugates)))
        except ValueError as e:
            logger.error(ERR_INVALID_LITERAL.format(err=e))
            return EXIT_USAGE
        return EXIT_OK
    if cfg.prefix is not None:
        print(ptm_prefix(cfg.prefix))
        return EXIT_OK
    if cfg.dump_a is not None:
        try:
            streams = build_A(cfg.dump_a)
        except NonPrimitiveWordError as e:
            logger.error(ERR_NOT_PRIMITIVE.format(err=e))
            return EXIT_CONSTRUCTION
        _emit(
            StreamsDTO(
                n_max=cfg.dump_a,
                streams={str(n): [str(s.generator) for s in group] for n, group in streams.items()},
            ),
            cfg.out,
        )
        return EXIT_OK

    wanted = WORD_CHECKS if cfg.check == "all" else (cfg.check,)
    scans = {"cube-free": scan_cube_free, "circular6": scan_circular, "primitive": scan_primitive}
    results = [scans[name](cfg.n_max) for name in wanted]
    _emit(
        WordsReportDTO(checks=[
            WordCheckDTO(check=r.check, n_max=r.n_max, ok=r.ok, n=r.n, word=r.word, position=r.position)
            for r in results
        ]),
        cfg.out,
    )
    failed = [r for r in results if not r.ok]
    for r in failed:
        logger.error(ERR_WORD_CHECK.format(check=r.check, n=r.n, word=r.word, position=r.position))
    return EXIT_FAILED if failed else EXIT_OK


def run_separation(cfg: RunConfig) -> int:
    """
    Distance table of periodic probes to the Thue–Morse orbits; with --coeffs
    also an escape scan of the realizing map. Heuristic: always exits 0.
    """
    settings = get_settings()
    report = separation_proxy(
        cfg.n_max,
        cfg.probe_period,
        floor=settings.separation_floor,
        window=settings.separation_window,
    )
    if report.rows:
        logger.info("separation distances\n%s", report.to_frame().to_string())

    escape = None
    if cfg.coeffs is not None:
        try:
            f = build_map(parse_coefficients(cfg.coeffs))
        except InvalidLiteralError as e:
            logger.error(ERR_INVALID_LITERAL.format(err=e))
            return EXIT_USAGE
        except NonPrimitiveWordError as e:
            logger.error(ERR_NOT_PRIMITIVE.format(err=e))
            return EXIT_CONSTRUCTION
        scan = escape_scan(
            f,
            samples=settings.escape_samples,
            steps=settings.escape_steps,
            band=settings.escape_band,
            seed=settings.seed if cfg.seed is None else cfg.seed,
            tol=settings.escape_return_tol,
            min_fraction=settings.escape_min_fraction,
        )
        escape = EscapeReportDTO(
            samples=scan.samples,
            steps=scan.steps,
            band=scan.band,
            escaped_up=scan.escaped_up,
            escaped_down=scan.escaped_down,
            escaped_fraction=scan.escaped_fraction,
            min_fraction=scan.min_fraction,
            ok=scan.ok,
            suspects=[[t, float(k)] for t, k in scan.suspects],
        )

    _emit(
        SeparationReportDTO(
            n_max=report.n_max,
            probe_period=report.probe_period,
            ok=report.ok,
            rows=[
                SeparationRowDTO(
                    beta=str(r.beta),
                    period=r.period,
                    floor=None if r.floor is None else str(r.floor),
                    flagged=r.flagged,
                    distances=[None if d is None else float(d) for d in r.distances],
                )
                for r in report.rows
            ],
            escape=escape,
        ),
        cfg.out,
    )
    return EXIT_OK


def run_map_dump(cfg: RunConfig) -> int:
    """Build from --coeffs, or rebuild from --from, and dump the map."""
    try:
        if cfg.source is not None:
            f = load_map(cfg.source)
        else:
            f = build_map(parse_coefficients(cfg.coeffs))
    except FileNotFoundError:
        logger.error(ERR_FILE_NOT_FOUND.format(path=cfg.source))
        return EXIT_FAILED
    except MapDumpError as e:
        logger.error(ERR_MAP_DUMP.format(err=e))
        return EXIT_FAILED
    except InvalidLiteralError as e:
        logger.error(ERR_INVALID_LITERAL.format(err=e))
        return EXIT_USAGE
    except NonPrimitiveWordError as e:
        logger.error(ERR_NOT_PRIMITIVE.format(err=e))
        return EXIT_CONSTRUCTION

    sys.stdout.write(dumps(to_json_dict(MapDumpDTO.model_validate(map_to_payload(f)))))
    if cfg.out:
        save_map(f, cfg.out)
    return EXIT_OK


def _input_group(sp: argparse.ArgumentParser, required: bool = True):
    group = sp.add_mutually_exclusive_group(required=required)
    group.add_argument("--coeffs", help="coefficient literal k:a,k:a")
    group.add_argument("--index", help="index literal i1,i2,...")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dold-realize")
    ap.add_argument("--log-level", default=None, help="overrides LOG_LEVEL")
    sub = ap.add_subparsers(dest="command", required=True)

    sp_realize = sub.add_parser("realize", help="build the map and verify its indices")
    _input_group(sp_realize)
    sp_realize.add_argument("--max-n", type=int, default=None)
    sp_realize.add_argument("--samples", type=int, default=None, help="initial samples per sub-sector")
    sp_realize.add_argument("--max-depth", type=int, default=None)
    sp_realize.add_argument("--n-jobs", type=int, default=None)
    sp_realize.add_argument("--dump-curve", action="store_true")
    sp_realize.add_argument("--out", default=None)
    sp_realize.set_defaults(handler=run_realize)

    sp_validate = sub.add_parser("validate", help="check Dold congruences")
    _input_group(sp_validate)
    sp_validate.add_argument("--max-n", type=int, default=None)
    sp_validate.add_argument("--out", default=None)
    sp_validate.set_defaults(handler=run_validate)

    sp_invert = sub.add_parser("invert", help="index literal to coefficient literal")
    sp_invert.add_argument("--index", required=True)
    sp_invert.add_argument("--out", default=None)
    sp_invert.set_defaults(handler=run_invert)

    sp_words = sub.add_parser("words", help="Thue-Morse word checks")
    sp_words.add_argument("--check", choices=WORD_CHECKS + ("all",), default="all")
    sp_words.add_argument("--n-max", type=int, default=256)
    sp_words.add_argument("--conjugates", default=None, metavar="WORD")
    sp_words.add_argument("--prefix", type=int, default=None, metavar="N")
    sp_words.add_argument("--dump-a", type=int, default=None, metavar="N_MAX")
    sp_words.add_argument("--out", default=None)
    sp_words.set_defaults(handler=run_words)

    sp_map = sub.add_parser("map-dump", help="dump the realizing map as JSON")
    group = sp_map.add_mutually_exclusive_group(required=True)
    group.add_argument("--coeffs")
    group.add_argument("--from", dest="source", metavar="PATH")
    sp_map.add_argument("--out", default=None)
    sp_map.set_defaults(handler=run_map_dump)

    sp_sep = sub.add_parser("separation", help="isolation diagnostics")
    sp_sep.add_argument("--n-max", type=int, default=64)
    sp_sep.add_argument("--probe-period", type=int, default=3)
    sp_sep.add_argument("--coeffs", default=None)
    sp_sep.add_argument("--seed", type=int, default=None)
    sp_sep.add_argument("--out", default=None)
    sp_sep.set_defaults(handler=run_separation)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    configure_logging(args.log_level or settings.log_level)
    handler = args.handler
    try:
        cfg = RunConfig(**{k: v for k, v in vars(args).items() if k != "handler"})
    except ValidationError as e:
        logger.error(ERR_INVALID_CONFIG.format(err=e))
        return EXIT_USAGE
    logger.debug("run %s", cfg.model_dump(exclude_none=True))
    return handler(cfg)


if __name__ == "__main__":
    sys.exit(main())
