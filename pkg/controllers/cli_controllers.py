"""
Controladores da CLI
Separação entre leitura/validação da config, execução e escrita do relatório
"""
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from models.report_models import RunConfig, RunReport, TaskType
from services.demo_catalog import get_demo
from services.service_orchestrator import ServiceOrchestrator
from utils.config import get_settings
from utils.exceptions import ConfigError, RefMeasureError
from utils.serialization import dumps, load_json, write_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NOT_OK = 3


class BaseController:
    """Controlador base com funcionalidades comuns"""

    task: TaskType = TaskType.ANALYZE

    def __init__(self, orchestrator: Optional[ServiceOrchestrator] = None):
        self.orchestrator = orchestrator or ServiceOrchestrator()

    def _load_config(
        self, config_path: str, seed: Optional[int] = None
    ) -> RunConfig:
        payload: Dict[str, Any] = load_json(config_path)
        if not isinstance(payload, dict):
            raise ConfigError(f'Config deve ser um objeto JSON: {config_path}')
        payload.setdefault('task', self.task.value)
        config = RunConfig.model_validate(payload)
        if config.task != self.task:
            raise ConfigError(
                f'Config declara task={config.task.value}, '
                f'esperado {self.task.value}'
            )
        if seed is not None:
            config.options.seed = seed
        return config

    def _handle_service_error(
        self, error: Exception, out: Optional[str]
    ) -> int:
        """Converte erros de serviço em código de saída"""
        if isinstance(error, (ConfigError, ValidationError)):
            logger.error('Configuração inválida: %s', error)
            return EXIT_CONFIG
        if isinstance(error, RefMeasureError):
            logger.error('%s: %s', type(error).__name__, error)
            report = RunReport(
                schema_version=get_settings().schema_version,
                task=self.task,
                status='not_ok',
                notes=[f'{type(error).__name__}: {error}'],
            )
            self._write(report, out)
            return EXIT_NOT_OK
        logger.exception('Erro inesperado na tarefa %s', self.task.value)
        return EXIT_UNEXPECTED

    def _write(self, report: RunReport, out: Optional[str]) -> None:
        # round-trip pelo esquema publicado
        payload = RunReport.model_validate(
            report.model_dump(mode='json')
        ).model_dump(mode='json')
        if out:
            write_json(out, payload)
            logger.info('Relatório escrito em %s', out)
        else:
            sys.stdout.write(dumps(payload) + '\n')

    def _finish(self, report: RunReport, out: Optional[str]) -> int:
        self._write(report, out)
        return EXIT_OK if report.status == 'ok' else EXIT_NOT_OK


class AnalyzeController(BaseController):
    """Extremos dos suportes e diagnóstico de invariância"""

    task = TaskType.ANALYZE

    def execute(
        self, config_path: str, out: Optional[str], seed: Optional[int]
    ) -> int:
        try:
            config = self._load_config(config_path, seed)
            return self._finish(self.orchestrator.analyze(config), out)
        except Exception as e:
            return self._handle_service_error(e, out)


class ElicitVarController(BaseController):
    """Recuperação de P e intervalo para γ a partir de uma capacidade VaR"""

    task = TaskType.ELICIT_VAR

    def execute(
        self, config_path: str, out: Optional[str], seed: Optional[int]
    ) -> int:
        try:
            config = self._load_config(config_path, seed)
            return self._finish(self.orchestrator.elicit(config), out)
        except Exception as e:
            return self._handle_service_error(e, out)


class ConvergeController(BaseController):
    """Série de convergência; a tabela vai para um CSV ao lado do JSON"""

    task = TaskType.CONVERGE

    def execute(
        self, config_path: str, out: Optional[str], seed: Optional[int]
    ) -> int:
        try:
            config = self._load_config(config_path, seed)
            report, frame = self.orchestrator.converge(config)
            if out:
                csv_path = Path(out).with_suffix('.csv')
                csv_path.parent.mkdir(parents=True, exist_ok=True)
                frame.to_csv(csv_path, index=False)
                report.notes.append(f'tabela em {csv_path}')
            return self._finish(report, out)
        except Exception as e:
            return self._handle_service_error(e, out)


class DemoController(BaseController):
    """Demos com comparação golden"""

    task = TaskType.DEMO

    def _load_override(self, name: str, config_path: str) -> RunConfig:
        """Config do usuário no lugar da config do cenário"""
        scenario = get_demo(name)
        if scenario.config is None:
            raise ConfigError(f'Demo {name!r} não aceita --config')
        payload: Dict[str, Any] = load_json(config_path)
        if not isinstance(payload, dict):
            raise ConfigError(f'Config deve ser um objeto JSON: {config_path}')
        expected = scenario.config['task']
        payload.setdefault('task', expected)
        config = RunConfig.model_validate(payload)
        if config.task.value != expected:
            raise ConfigError(
                f'Demo {name!r} executa task={expected}, '
                f'config declara {config.task.value}'
            )
        return config

    def execute(
        self,
        name: str,
        out: Optional[str],
        golden_update: bool = False,
        golden_dir: Optional[str] = None,
        config_path: Optional[str] = None,
    ) -> int:
        try:
            config = None
            if config_path:
                config = self._load_override(name, config_path)
            report = self.orchestrator.run_demo(
                name,
                golden_dir=golden_dir,
                update=golden_update,
                config=config,
            )
            return self._finish(report, out)
        except Exception as e:
            return self._handle_service_error(e, out)
