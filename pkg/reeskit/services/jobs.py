import logging
import time
from math import comb
from typing import Any, Optional, Sequence, Union

from reeskit import constants
from reeskit.config import Budget, Settings
from reeskit.models import CheckResult, JobSpec, Report, SubspaceTableBlock
from reeskit.services.filtration import FiltrationFamily
from reeskit.services.gradedla import QuotientRing
from reeskit.services.groebner import Ideal, buchberger, initial_ideal, is_groebner_basis
from reeskit.services.polycore import (
    PolynomialRing,
    TermOrder,
    WeightVector,
    format_rational,
)
from reeskit.services.rees import (
    CentralFiber,
    FiberElement,
    FlatnessReport,
    ReesWindow,
    SubspaceTable,
    central_fiber,
    check_flatness,
    domain_test,
    multiplicativity_sample,
    verify_graded_bookkeeping,
    weight_cone_sample,
)
from reeskit.services.toric import (
    LatticeBox,
    ToricDivisor,
    ToricModel,
    check_noncartier_sum,
    check_valuative_ideal,
    dual_monoid_points,
    is_cartier,
    lattice_index,
)

logger = logging.getLogger(__name__)

COMMANDS = ("gb", "initial", "flatness", "fiber", "toric", "example41")


def _one_based(subset: Sequence[int]) -> list[int]:
    return [i + 1 for i in subset]


def _element_json(element: FiberElement) -> dict[str, Any]:
    return {"n": element.n, "m": list(element.m), "lift": str(element.lift)}


def _ring(spec: JobSpec) -> PolynomialRing:
    if spec.ring is None:
        raise ValueError("The job needs a ring block")
    grading = tuple(spec.ring.grading or ())
    return PolynomialRing(tuple(spec.ring.vars), grading)  # type: ignore[arg-type]


def _quotient(spec: JobSpec, budget: Budget) -> QuotientRing:
    ring = _ring(spec)
    return QuotientRing(ring, [ring.parse(text) for text in spec.relations], budget)


def _family(spec: JobSpec, budget: Budget) -> FiltrationFamily:
    if not spec.cutters:
        raise ValueError("The job needs at least one cutter")
    quotient = _quotient(spec, budget)
    return FiltrationFamily(
        quotient, [quotient.parse(text) for text in spec.cutters], budget
    )


def _table(block: SubspaceTableBlock) -> SubspaceTable:
    cells = {(cell.n, tuple(cell.m)): cell.rows for cell in block.cells}
    return SubspaceTable(block.r, block.ambient_dim, cells)  # type: ignore[arg-type]


def _alphas(spec: JobSpec, r: int) -> list[WeightVector]:
    if not spec.alphas:
        return [WeightVector.of([1] * r)]
    return [WeightVector.of(alpha) for alpha in spec.alphas]


def _window_params(window: ReesWindow) -> dict[str, Any]:
    return {
        "N": window.degree_bound,
        "W": [list(bounds) for bounds in window.index_window],
    }


def _timed(name: str, started: float) -> None:
    logger.info(f"✅ {name} finished in {time.monotonic() - started:.2f}s")


class JobService:
    """The command implementations; each returns a Report whose first line echoes the job."""

    @staticmethod
    def _report(command: str, spec: JobSpec) -> Report:
        report = Report(command=command)
        report.add(
            CheckResult(
                check="job",
                params={"command": command, "version": constants.VERSION},
                verdict="info",
                data={"spec": spec.echo()},
            )
        )
        return report

    @staticmethod
    def run(command: str, spec: JobSpec, settings: Settings) -> Report:
        if command not in COMMANDS:
            raise ValueError(f"Unknown command {command!r}")
        handler = getattr(JobService, f"cmd_{command}")
        return handler(spec, settings)

    # --- gb / initial ----------------------------------------------------------------

    @staticmethod
    def cmd_gb(spec: JobSpec, settings: Settings) -> Report:
        """Reduced Gröbner basis of ``generators`` (or ``relations``)."""
        report = JobService._report("gb", spec)
        started = time.monotonic()
        ring = _ring(spec)
        texts = spec.generators if spec.generators is not None else spec.relations
        ideal = Ideal.from_strings(ring, texts)
        order = TermOrder.named(spec.order)
        basis = buchberger(ideal, order, Budget.from_settings(settings))
        report.add(
            CheckResult(
                check="gb",
                params={"ring": str(ring), "order": spec.order},
                verdict="pass",
                data={
                    "ideal": str(ideal),
                    "basis": [str(g) for g in basis.elements],
                    "size": len(basis.elements),
                    "criterion": is_groebner_basis(list(basis.elements), order),
                },
            )
        )
        _timed("gb", started)
        return report

    @staticmethod
    def _initial_line(spec: JobSpec, settings: Settings) -> CheckResult:
        ring = _ring(spec)
        if spec.weight is None:
            raise ValueError("The initial command needs a weight vector")
        weight = WeightVector.of(spec.weight)
        texts = spec.generators if spec.generators is not None else spec.relations
        ideal = Ideal.from_strings(ring, texts)
        result = initial_ideal(ideal, weight, Budget.from_settings(settings))
        return CheckResult(
            check="initial",
            params={"ring": str(ring), "weight": [format_rational(w) for w in weight.weights]},
            verdict="pass",
            data={"ideal": str(ideal), "initial_ideal": str(result)},
        )

    @staticmethod
    def cmd_initial(spec: JobSpec, settings: Settings) -> Report:
        report = JobService._report("initial", spec)
        started = time.monotonic()
        report.add(JobService._initial_line(spec, settings))
        _timed("initial", started)
        return report

    # --- flatness --------------------------------------------------------------------

    @staticmethod
    def _flatness_window(
        spec: JobSpec,
        budget: Budget,
        index_window: Optional[Union[Sequence[int], Sequence[Sequence[int]]]] = None,
        family: Optional[FiltrationFamily] = None,
    ) -> tuple[ReesWindow, str]:
        if spec.subspace_table is not None:
            block = spec.subspace_table
            table = _table(block)
            if spec.window is not None:
                degree_bound = spec.window.degree_bound
                box = index_window or spec.window.index_window
            else:
                degree_bound = block.degree_bound
                tops = [0] * block.r
                for cell in block.cells:
                    tops = [max(t, max(e, 0)) for t, e in zip(tops, cell.m)]
                box = index_window or [[0, t] for t in tops]
            return ReesWindow(table, degree_bound, box, budget), "table"
        if spec.window is None:
            raise ValueError("The job needs a window block")
        family = family or _family(spec, budget)
        box = index_window or spec.window.index_window
        return ReesWindow(family, spec.window.degree_bound, box, budget), "cutters"

    @staticmethod
    def _flatness_line(window: ReesWindow, source: str, threads: int) -> tuple[
        CheckResult, FlatnessReport
    ]:
        result = check_flatness(window, threads)
        nonzero = [
            {
                "subset": _one_based(cell.subset),
                "m": list(cell.m),
                "n": cell.n,
                "homology": list(cell.homology),
            }
            for cell in result.cells
            if any(cell.homology)
        ]
        witness = None
        if result.witness is not None:
            witness = {
                "subset": _one_based(result.witness.subset),
                "m": list(result.witness.m),
                "n": result.witness.n,
                "p": result.witness.position,
                "dim": result.witness.dim,
            }
        line = CheckResult(
            check="flatness",
            params={**_window_params(window), "source": source},
            verdict=result.verdict,
            data={"cells": len(result.cells), "nonzero_cells": nonzero},
            witness=witness,
        )
        return line, result

    @staticmethod
    def cmd_flatness(spec: JobSpec, settings: Settings) -> Report:
        report = JobService._report("flatness", spec)
        started = time.monotonic()
        window, source = JobService._flatness_window(spec, Budget.from_settings(settings))
        line, _ = JobService._flatness_line(window, source, settings.threads)
        report.add(line)
        _timed("flatness", started)
        return report

    # --- fiber -----------------------------------------------------------------------

    @staticmethod
    def _fiber_lines(
        spec: JobSpec, settings: Settings, report: Report,
        family: Optional[FiltrationFamily] = None,
    ) -> tuple[ReesWindow, CentralFiber]:
        if spec.window is None:
            raise ValueError("The job needs a window block")
        budget = Budget.from_settings(settings)
        family = family or _family(spec, budget)
        window = ReesWindow(
            family, spec.window.degree_bound, spec.window.index_window, budget
        )
        params = _window_params(window)

        started = time.monotonic()
        fiber = central_fiber(window)
        report.add(
            CheckResult(
                check="central_fiber",
                params=params,
                verdict="pass",
                data={
                    "totals": [fiber.totals[n] for n in sorted(fiber.totals)],
                    "pieces": [
                        {"n": n, "m": list(m), "dim": dim}
                        for (n, m), dim in sorted(fiber.dimension_table().items())
                        if dim
                    ],
                },
            )
        )
        _timed("central fiber", started)

        started = time.monotonic()
        domain = domain_test(window, spec.domain_degree)
        report.add(
            CheckResult(
                check="domain",
                params={**params, "d": spec.domain_degree},
                verdict="pass" if domain.passed else "witness",
                data={"pairs_checked": domain.pairs_checked},
                witness=(
                    [_element_json(e) for e in domain.witness] if domain.witness else None
                ),
            )
        )
        _timed("domain test", started)

        started = time.monotonic()
        sample = weight_cone_sample(window, fiber)
        report.add(
            CheckResult(
                check="weight_cone",
                params=params,
                verdict="pass" if sample.saturated else "fail",
                data={
                    "support_size": len(sample.support),
                    "rays": [list(ray) for ray in sample.rays],
                    "facets": [list(facet) for facet in sample.cone.facets],
                    "equations": [list(eq) for eq in sample.cone.equations],
                    "saturated": sample.saturated,
                },
                witness={"hole": list(sample.hole)} if sample.hole else None,
            )
        )
        _timed("weight cone", started)

        totals_by_alpha: dict[str, list[int]] = {}
        for alpha in _alphas(spec, family.r):
            started = time.monotonic()
            bookkeeping = verify_graded_bookkeeping(window, alpha)
            key = str(alpha)
            totals_by_alpha[key] = [
                bookkeeping.totals[n] for n in sorted(bookkeeping.totals)
            ]
            first = bookkeeping.mismatches[0] if bookkeeping.mismatches else None
            report.add(
                CheckResult(
                    check="bookkeeping",
                    params={**params, "alpha": key},
                    verdict="mismatch" if first else "pass",
                    data={
                        "levels": len(bookkeeping.levels),
                        "mismatches": len(bookkeeping.mismatches),
                    },
                    witness=(
                        {
                            "n": first.n,
                            "level": format_rational(first.level),
                            "filtration_dim": first.filtration_dim,
                            "fiber_dim": first.fiber_dim,
                        }
                        if first
                        else None
                    ),
                )
            )
            _timed(f"bookkeeping {key}", started)

            if spec.multiplicativity_pairs:
                started = time.monotonic()
                sample_report = multiplicativity_sample(
                    family,
                    alpha,
                    spec.ord_window,
                    spec.multiplicativity_pairs,
                    spec.multiplicativity_degree,
                    spec.seed,
                )
                failure = sample_report.failures[0] if sample_report.failures else None
                report.add(
                    CheckResult(
                        check="multiplicativity",
                        params={
                            "alpha": key,
                            "pairs": spec.multiplicativity_pairs,
                            "max_degree": spec.multiplicativity_degree,
                            "seed": spec.seed,
                        },
                        verdict="fail" if failure else "pass",
                        data={
                            "failures": len(sample_report.failures),
                            "boundary": len(sample_report.inconclusive),
                        },
                        witness=(
                            {
                                "f": str(failure.f),
                                "g": str(failure.g),
                                "ord_f": format_rational(failure.ord_f),
                                "ord_g": format_rational(failure.ord_g),
                                "ord_product": (
                                    format_rational(failure.ord_product)
                                    if failure.ord_product is not None
                                    else "inf"
                                ),
                            }
                            if failure
                            else None
                        ),
                    )
                )
                _timed(f"multiplicativity {key}", started)

        distinct = {tuple(totals) for totals in totals_by_alpha.values()}
        report.add(
            CheckResult(
                check="alpha_independence",
                params={"alphas": list(totals_by_alpha)},
                verdict="pass" if len(distinct) == 1 else "mismatch",
                data={"totals": totals_by_alpha},
            )
        )
        return window, fiber

    @staticmethod
    def cmd_fiber(spec: JobSpec, settings: Settings) -> Report:
        report = JobService._report("fiber", spec)
        JobService._fiber_lines(spec, settings, report)
        return report

    # --- toric -----------------------------------------------------------------------

    @staticmethod
    def cmd_toric(spec: JobSpec, settings: Settings) -> Report:
        report = JobService._report("toric", spec)
        if spec.toric is None:
            raise ValueError("The toric command needs a toric block")
        block = spec.toric
        started = time.monotonic()
        model = ToricModel.from_rays(block.rays, block.overlattice)
        if isinstance(block.box, int):
            box = LatticeBox.symmetric(block.box, model.r)
        else:
            box = LatticeBox(tuple((pair[0], pair[1]) for pair in block.box))
        box_param = [list(bounds) for bounds in box.bounds]
        report.add(
            CheckResult(
                check="toric_model",
                params={"box": box_param},
                verdict="info",
                data={
                    "lattice_index": lattice_index(model),
                    "dual_monoid_points": len(dual_monoid_points(model, box)),
                },
            )
        )
        alphas = [WeightVector.of(alpha) for alpha in block.alphas]
        for coefficients in block.divisors:
            divisor = ToricDivisor(tuple(coefficients))
            cartier = is_cartier(model, divisor)
            report.add(
                CheckResult(
                    check="cartier",
                    params={"divisor": list(divisor.coefficients)},
                    verdict="info",
                    data={
                        "cartier": cartier.is_cartier,
                        "index": cartier.index,
                        "solution": [format_rational(x) for x in cartier.solution],
                    },
                    witness=list(cartier.witness) if cartier.witness else None,
                )
            )
            if not cartier.is_cartier:
                split = check_noncartier_sum(model, divisor, box)
                report.add(
                    CheckResult(
                        check="noncartier_sum",
                        params={"divisor": list(divisor.coefficients), "box": box_param},
                        verdict="pass" if split.verified else "fail",
                        data={"sections": split.checked},
                        witness=(
                            [list(s.u) for s in split.counterexamples]
                            if split.counterexamples
                            else None
                        ),
                    )
                )
            for alpha in alphas:
                for level in block.lambdas:
                    valuative = check_valuative_ideal(model, divisor, alpha, level, box)
                    first = valuative.mismatches[0] if valuative.mismatches else None
                    report.add(
                        CheckResult(
                            check="valuative_ideal",
                            params={
                                "divisor": list(divisor.coefficients),
                                "alpha": str(alpha),
                                "lambda": format_rational(valuative.level),
                                "box": box_param,
                            },
                            verdict="mismatch" if first else "pass",
                            data={
                                "sections": valuative.checked,
                                "in_ideal": valuative.in_ideal,
                            },
                            witness=(
                                {
                                    "u": list(first.section.u),
                                    "valuation": format_rational(first.valuation),
                                }
                                if first
                                else None
                            ),
                        )
                    )
        _timed("toric", started)
        return report

    # --- cubic threefold scenario --------------------------------------------------------

    @staticmethod
    def example41_spec(overrides: Optional[dict[str, Any]] = None) -> JobSpec:
        """The frozen cubic-threefold job, with top-level fields replaced by ``overrides``."""
        return JobSpec.model_validate({**constants.EXAMPLE_41_JOB, **(overrides or {})})

    @staticmethod
    def cmd_example41(spec: JobSpec, settings: Settings) -> Report:
        """
        Initial ideal, flatness on W = [0, 4]^2, the central fiber on the job window with
        every check of the fiber command, then a ``golden`` line against the frozen values.
        """
        report = JobService._report("example41", spec)
        assert spec.window is not None
        N = spec.window.degree_bound

        started = time.monotonic()
        initial = report.add(JobService._initial_line(spec, settings))
        _timed("initial", started)

        started = time.monotonic()
        budget = Budget.from_settings(settings)
        family = _family(spec, budget)
        flat_window, _ = JobService._flatness_window(
            spec, budget, [0, constants.EXAMPLE_41_FLATNESS_INDEX_BOUND], family
        )
        flat_line, flat = JobService._flatness_line(
            flat_window, "cutters", settings.threads
        )
        report.add(flat_line)
        _timed("flatness", started)

        first_fiber_line = len(report.lines)
        window, fiber = JobService._fiber_lines(spec, settings, report, family)

        expected_totals = [comb(n + 5, 5) - comb(n + 2, 5) for n in range(N + 1)]
        totals = [fiber.totals[n] for n in range(N + 1)]
        expected_support = sorted(
            (n, m)
            for n in range(N + 1)
            for m in window.indices()
            if sum(m) <= n
        )
        checks = {
            "initial_ideal": initial.data["initial_ideal"]
            == constants.EXAMPLE_41_INITIAL_IDEAL,
            "flatness": flat.certified,
            "hilbert_totals": totals == expected_totals,
            "support": fiber.support() == expected_support,
            "fiber_checks": all(
                not line.negative for line in report.lines[first_fiber_line:]
            ),
        }
        report.add(
            CheckResult(
                check="golden",
                params={"N": N},
                verdict="pass" if all(checks.values()) else "fail",
                data={
                    "checks": checks,
                    "totals": totals,
                    "expected_totals": expected_totals,
                },
            )
        )
        return report
