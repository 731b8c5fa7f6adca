"""
Service Orchestrator - coordena os serviços para as tarefas da CLI
Implementa o padrão Facade sobre espaço, jogos, suportes e elicitação
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import pandas as pd

from models.elicitation import CandidateReport, CandidateStatus
from models.report_models import (
    GoldenComparison,
    RunConfig,
    RunReport,
    TargetConfig,
    TaskType,
    Verdict,
)
from models.space import FiniteSpace
from models.support import Side
from models.variable import Dictionary
from services import demo_catalog
from services.choquet_service import (
    comonotonic_additivity_test,
    coordinate_oracle,
    expectation_oracle,
    functional_invariance_test,
    riskmetric_oracle,
    table_oracle,
)
from services.elicitation_service import (
    candidate_from_extremum,
    convergence_study,
    elicit_var,
    recover_parameter,
)
from services.game_service import (
    check_invariance,
    classify_properties,
    game_from_config,
)
from services.space_service import build_space
from services.support_service import (
    build_dictionary,
    dictionary_extremum,
    loose_extremum,
    sandwich_constants,
    strict_extremum,
)
from utils.config import get_settings
from utils.exceptions import ConfigError, ElicitationError
from utils.performance import PerformanceMonitor, monitor_performance
from utils.serialization import load_json, to_jsonable, write_json

RECOVERABLE = ('es', 'entropic')


class ServiceOrchestrator:
    """
    Orquestrador das tarefas analyze, elicit_var, converge e demo
    Cada tarefa devolve um RunReport; erros sobem para os controladores.
    """

    def __init__(self, monitor: Optional[PerformanceMonitor] = None):
        self.settings = get_settings()
        self.monitor = monitor or PerformanceMonitor()
        self.logger = logging.getLogger(__name__)

    def run(self, config: RunConfig) -> RunReport:
        if config.task == TaskType.ANALYZE:
            return self.analyze(config)
        if config.task == TaskType.ELICIT_VAR:
            return self.elicit(config)
        if config.task == TaskType.CONVERGE:
            return self.converge(config)[0]
        return self.run_demo(config.demo)

    def _new_report(self, config: RunConfig) -> RunReport:
        self.monitor.reset_stats()
        return RunReport(
            schema_version=self.settings.schema_version,
            task=config.task,
            config=config.model_dump(mode='json', exclude_none=True),
        )

    def _space(self, config: RunConfig) -> FiniteSpace:
        return build_space(config.space.model_dump(exclude_none=True))

    @staticmethod
    def _game_block(target: TargetConfig) -> Dict[str, Any]:
        block = {'family': target.family, **target.params}
        if target.values is not None:
            block['values'] = target.values
        return block

    # ============== ANALYZE ==============

    @monitor_performance('analyze')
    def analyze(self, config: RunConfig) -> RunReport:
        report = self._new_report(config)
        space = self._space(config)
        report.space = space.to_dict()
        self.logger.info(
            'analyze: %s %s em %d átomos',
            config.target.kind,
            config.target.family,
            space.n,
        )
        if config.target.kind == 'game':
            candidate = self._analyze_game(config, space, report)
        else:
            candidate = self._analyze_functional(config, space, report)
        report.timings = self.monitor.timings()
        self._conclude(report, candidate)
        return report

    def _analyze_game(
        self, config: RunConfig, space: FiniteSpace, report: RunReport
    ) -> Optional[CandidateReport]:
        P = space.probability
        settings = self.settings
        v = game_from_config(self._game_block(config.target), P)

        with self.monitor.stage('properties'):
            if space.n <= settings.pair_scan_atoms:
                report.properties = classify_properties(v, P).to_dict()
            else:
                report.notes.append(
                    f'propriedades omitidas: n > {settings.pair_scan_atoms}'
                )

        with self.monitor.stage('extrema'):
            cross = config.options.cross_check
            anticore = loose_extremum(v, Side.ANTICORE_SUP, cross)
            report.extrema['loose_anticore_sup'] = to_jsonable(
                anticore.to_dict()
            )
            report.extrema['loose_core_inf'] = to_jsonable(
                loose_extremum(v, Side.CORE_INF, cross).to_dict()
            )
            if space.n <= settings.strict_lp_atoms:
                for side in (Side.ANTICORE_SUP, Side.CORE_INF):
                    report.extrema[side.value] = to_jsonable(
                        strict_extremum(v, side).to_dict()
                    )
            report.sandwich = to_jsonable(sandwich_constants(v, P).to_dict())

        with self.monitor.stage('candidate'):
            candidate = candidate_from_extremum(anticore, P)
            report.candidate = to_jsonable(candidate.to_dict())
            if candidate.ok:
                report.invariance = to_jsonable(
                    check_invariance(v, P).to_dict()
                )
                self._recover(config.target, candidate, report)
        return candidate

    def _oracle(
        self, target: TargetConfig, space: FiniteSpace
    ) -> Tuple[Any, Optional[Dictionary]]:
        P = space.probability
        family, params = target.family, target.params
        if family in ('var', 'es', 'entropic'):
            return riskmetric_oracle(family, P, **params), None
        if family == 'expectation':
            return expectation_oracle(P), None
        if family == 'coordinate':
            index = int(params.get('index', 0))
            if not 0 <= index < space.n:
                raise ConfigError(f'Índice de coordenada inválido: {index}')
            return coordinate_oracle(index), None
        if family == 'table':
            pairs = [(entry.variable, entry.value) for entry in target.table]
            return table_oracle(space, pairs)
        raise ConfigError(f'Funcional desconhecido: {family!r}')

    def _analyze_functional(
        self, config: RunConfig, space: FiniteSpace, report: RunReport
    ) -> Optional[CandidateReport]:
        P = space.probability
        options = config.options
        seed = self.settings.seed if options.seed is None else options.seed
        phi, dictionary = self._oracle(config.target, space)
        if dictionary is None:
            dictionary = build_dictionary(
                space, options.strategy, k=options.k, seed=seed
            )
        report.config['dictionary_size'] = len(dictionary)

        with self.monitor.stage('extrema'):
            extrema = {
                side: dictionary_extremum(phi, dictionary, side)
                for side in (Side.LOWER_SUP, Side.UPPER_INF)
            }
            for side, extremum in extrema.items():
                report.extrema[side.value] = to_jsonable(extremum.to_dict())

        if config.target.family != 'table':
            with self.monitor.stage('comonotonic'):
                report.comonotonic_additivity = to_jsonable(
                    comonotonic_additivity_test(
                        phi, space, seed=seed
                    ).to_dict()
                )

        candidate = None
        with self.monitor.stage('candidate'):
            for side, extremum in extrema.items():
                if not extremum.exists:
                    continue
                candidate = candidate_from_extremum(extremum, P)
                report.notes.append(f'candidato a partir de {side.value}')
                if candidate.status != CandidateStatus.ZERO_EXTREMUM:
                    break
            if candidate is not None:
                report.candidate = to_jsonable(candidate.to_dict())
            if candidate is not None and candidate.ok:
                report.invariance = to_jsonable(
                    functional_invariance_test(
                        phi, P, dictionary, seed=seed
                    ).to_dict()
                )
                self._recover(config.target, candidate, report)
        return candidate

    def _recover(
        self,
        target: TargetConfig,
        candidate: CandidateReport,
        report: RunReport,
    ) -> None:
        if target.family not in RECOVERABLE:
            return
        key = 'beta' if target.family == 'es' else 'alpha'
        try:
            report.parameters[key] = to_jsonable(
                recover_parameter(target.family, candidate.scale)
            )
        except ElicitationError as exc:
            report.notes.append(f'parâmetro não recuperado: {exc}')

    def _conclude(
        self, report: RunReport, candidate: Optional[CandidateReport]
    ) -> None:
        if candidate is None:
            report.verdict = Verdict.NO_EXTREMUM
        elif candidate.status == CandidateStatus.ZERO_EXTREMUM:
            report.verdict = Verdict.NO_CONCLUSION
            report.notes.append(
                'extremo nulo: nenhuma conclusão sobre P; para capacidades '
                'VaR use elicit-var'
            )
        elif candidate.status == CandidateStatus.SIGNED:
            report.verdict = Verdict.SIGNED
        elif candidate.status == CandidateStatus.NOT_PROPORTIONAL:
            report.verdict = Verdict.NOT_LAW_INVARIANT
        elif report.invariance and not report.invariance.get(
            'invariant', report.invariance.get('passes')
        ):
            report.verdict = Verdict.NOT_INVARIANT_WRT_CANDIDATE
        else:
            report.verdict = Verdict.CANDIDATE
        conclusive = (
            Verdict.CANDIDATE,
            Verdict.NOT_LAW_INVARIANT,
            Verdict.NOT_INVARIANT_WRT_CANDIDATE,
        )
        report.status = 'ok' if report.verdict in conclusive else 'not_ok'

    # ============== ELICIT VAR ==============

    @monitor_performance('elicit_var')
    def elicit(self, config: RunConfig) -> RunReport:
        report = self._new_report(config)
        space = self._space(config)
        report.space = space.to_dict()
        capacity = game_from_config(
            self._game_block(config.target), space.probability
        )
        result = elicit_var(
            capacity,
            space,
            config.options.depth,
            level_on_grid=config.options.level_on_grid,
        )
        self.logger.info(
            'elicit_var: ramo %s, status %s',
            result.branch.value,
            result.status,
        )
        report.elicitation = to_jsonable(result.to_dict())
        report.candidate = to_jsonable(result.candidate.to_dict())
        report.notes.extend(result.diagnostics)
        report.status = (
            'ok' if result.status in ('exact', 'bracket') else 'not_ok'
        )
        report.timings = self.monitor.timings()
        return report

    # ============== CONVERGE ==============

    @monitor_performance('converge')
    def converge(self, config: RunConfig) -> Tuple[RunReport, pd.DataFrame]:
        report = self._new_report(config)
        target, options = config.target, config.options
        series = convergence_study(
            target.family,
            options.n_sequence,
            options.statistic,
            **target.params,
        )
        report.convergence = to_jsonable(series.to_dict())
        if series.diverging:
            report.notes.append('série diverge: sem limite')
        report.timings = self.monitor.timings()
        return report, series.to_frame()

    # ============== DEMO ==============

    def run_demo(
        self,
        name: str,
        golden_dir: Optional[str] = None,
        update: bool = False,
        config: Optional[RunConfig] = None,
    ) -> RunReport:
        """
        Executa o cenário do catálogo; config substitui a config do
        cenário (mesma tarefa) e compara com o mesmo golden
        """
        scenario = demo_catalog.get_demo(name)
        self.logger.info('demo %s: %s', name, scenario.description)
        if config is None and scenario.config is not None:
            config = RunConfig(**scenario.config)
        if config is not None:
            report = self.run(config)
        else:
            report = RunReport(
                schema_version=self.settings.schema_version,
                task=TaskType.DEMO,
            )
        report.task = TaskType.DEMO
        report.config['demo'] = name
        if scenario.runner is not None:
            with self.monitor.stage(f'demo_{name}'):
                report.demo = scenario.runner()

        projection = demo_catalog.round_floats(
            scenario.project(report.model_dump(mode='json'))
        )
        report.golden = self._compare_golden(
            name, projection, golden_dir, update
        )
        if not report.golden.matches:
            report.status = 'not_ok'
        report.timings = self.monitor.timings()
        return report

    def _compare_golden(
        self,
        name: str,
        projection: Dict[str, Any],
        golden_dir: Optional[str],
        update: bool,
    ) -> GoldenComparison:
        path = Path(golden_dir or self.settings.golden_dir) / f'{name}.json'
        if update:
            write_json(path, projection)
            self.logger.info('golden %s atualizado', path)
            return GoldenComparison(
                name=name, path=str(path), matches=True, updated=True
            )
        if not path.exists():
            return GoldenComparison(
                name=name,
                path=str(path),
                matches=False,
                mismatches=['arquivo golden ausente'],
            )
        expected = demo_catalog.round_floats(load_json(path))
        actual = load_json_like(projection)
        mismatches = [
            key
            for key in sorted(set(expected) | set(actual))
            if expected.get(key) != actual.get(key)
        ]
        if mismatches:
            self.logger.warning('golden %s difere em %s', name, mismatches)
        return GoldenComparison(
            name=name,
            path=str(path),
            matches=not mismatches,
            mismatches=mismatches,
        )


def load_json_like(payload: Dict[str, Any]) -> Dict[str, Any]:
    """Mesma normalização aplicada ao golden lido do disco"""
    return demo_catalog.round_floats(to_jsonable(payload))
