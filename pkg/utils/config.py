from functools import lru_cache
from typing import Any, Dict

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Configurações da aplicação (variáveis REFMEASURE_* ou arquivo .env)"""

    model_config = SettingsConfigDict(
        env_prefix='REFMEASURE_', env_file='.env', extra='ignore'
    )

    # Limites de enumeração
    max_atoms: int = Field(24, description='Teto rígido para enumerar 2^n')
    warn_atoms: int = Field(16, description='Acima disso, avisa no log')
    materialize_atoms: int = Field(
        16, description='Jogos até esse n viram tabela completa'
    )
    pair_scan_atoms: int = Field(
        12, description='Varreduras sobre pares de eventos (4^n)'
    )
    brute_recursion_atoms: int = Field(
        10, description='Recursão g_t/h_t por força bruta'
    )
    permutation_atoms: int = Field(
        7, description='Enumeração completa de permutações'
    )
    strict_lp_atoms: int = Field(
        10, description='Núcleos estritos via LP com 2^n restrições'
    )

    # Tolerâncias
    value_tol: float = 1e-9
    pivot_tol: float = 1e-9
    comonotone_tol: float = 1e-7
    candidate_tol: float = 1e-7
    bisection_tol: float = 1e-10

    # Execução
    seed: int = 42
    lp_workers: int = 4
    real_digits: int = 12
    schema_version: str = '1.0'
    golden_dir: str = 'golden'
    log_level: str = 'INFO'


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Retorna a instância única de configurações"""
    return Settings()


def get_config() -> Dict[str, Any]:
    """Retorna todas as configurações como dicionário"""
    settings = get_settings()
    return {
        'limits': {
            'max_atoms': settings.max_atoms,
            'warn_atoms': settings.warn_atoms,
            'materialize_atoms': settings.materialize_atoms,
            'pair_scan_atoms': settings.pair_scan_atoms,
            'brute_recursion_atoms': settings.brute_recursion_atoms,
            'permutation_atoms': settings.permutation_atoms,
            'strict_lp_atoms': settings.strict_lp_atoms,
        },
        'tolerances': {
            'value': settings.value_tol,
            'pivot': settings.pivot_tol,
            'comonotone': settings.comonotone_tol,
            'candidate': settings.candidate_tol,
            'bisection': settings.bisection_tol,
        },
        'seed': settings.seed,
        'lp_workers': settings.lp_workers,
        'schema_version': settings.schema_version,
    }
