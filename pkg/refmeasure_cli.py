"""
refmeasure - CLI
Suportes, núcleos e elicitação da medida de referência em espaços finitos

Códigos de saída: 0 ok, 1 erro inesperado, 2 config inválida,
3 status numérico não ok (relatório escrito).
"""
import argparse
import logging
import sys
from typing import List, Optional

from controllers.cli_controllers import (
    AnalyzeController,
    ConvergeController,
    DemoController,
    ElicitVarController,
)
from services.demo_catalog import DEMOS
from services.service_orchestrator import ServiceOrchestrator
from utils.config import get_config, get_settings

# ============== LOGGING CONFIGURATION ==============

logging.basicConfig(
    level=getattr(logging, get_settings().log_level.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

# ============== ARGUMENTOS ==============


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='refmeasure',
        description='Extremos de suportes, núcleos e anti-núcleos; '
        'elicitação de P e de parâmetros de medidas de risco',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    for name, help_text in (
        ('analyze', 'Extremos e diagnóstico de invariância'),
        ('elicit-var', 'Recuperação de P e γ para capacidades VaR'),
        ('converge', 'Série de convergência em n (JSON + CSV)'),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument('--config', required=True, help='Config JSON')
        cmd.add_argument('--out', help='Relatório JSON (padrão: stdout)')
        cmd.add_argument('--seed', type=int, help='Sobrescreve a semente')

    demo = sub.add_parser('demo', help='Cenários de mesa com golden')
    demo.add_argument('name', help=f'Um de: {", ".join(sorted(DEMOS))}')
    demo.add_argument('--out', help='Relatório JSON (padrão: stdout)')
    demo.add_argument(
        '--golden-update',
        action='store_true',
        help='Reescreve o arquivo golden em vez de comparar',
    )
    demo.add_argument('--golden-dir', help='Diretório dos goldens')
    demo.add_argument(
        '--config',
        help='Config JSON que substitui a do cenário (mesma tarefa)',
    )
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    orchestrator = ServiceOrchestrator()
    logger.info('refmeasure %s', args.command)
    logger.debug('Configuração ativa: %s', get_config())

    if args.command == 'demo':
        return DemoController(orchestrator).execute(
            args.name,
            args.out,
            args.golden_update,
            args.golden_dir,
            args.config,
        )
    controllers = {
        'analyze': AnalyzeController,
        'elicit-var': ElicitVarController,
        'converge': ConvergeController,
    }
    controller = controllers[args.command](orchestrator)
    return controller.execute(args.config, args.out, args.seed)


if __name__ == '__main__':
    sys.exit(main())
