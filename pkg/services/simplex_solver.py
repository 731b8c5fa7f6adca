"""
Simplex denso em tableau (duas fases) para os LPs por átomo
Variáveis livres são divididas em x = u − w; regra de Bland contra ciclos.
"""
import logging
from typing import List, Optional, Tuple

import numpy as np

from interfaces.oracle_interfaces import ILinearSolver, LPStatus
from models.lp import LPProblem, LPResult, Relation, Sense
from utils.config import get_settings
from utils.exceptions import LPError, MalformedProblem

logger = logging.getLogger(__name__)


class DenseSimplexSolver(ILinearSolver):
    """Resolvedor primal de duas fases sobre tableau numpy denso"""

    def __init__(
        self,
        pivot_tol: Optional[float] = None,
        feasibility_tol: Optional[float] = None,
        max_pivots: int = 100_000,
    ):
        settings = get_settings()
        self.pivot_tol = settings.pivot_tol if pivot_tol is None else pivot_tol
        self.feasibility_tol = (
            settings.value_tol if feasibility_tol is None else feasibility_tol
        )
        self.max_pivots = max_pivots

    # ============== VALIDAÇÃO ==============

    @staticmethod
    def _validate(
        problem: LPProblem,
    ) -> Tuple[np.ndarray, np.ndarray, List[Relation], np.ndarray]:
        c = np.asarray(problem.objective, dtype=float).reshape(-1)
        n = c.size
        if n < 1:
            raise MalformedProblem('Objetivo vazio')
        if not np.all(np.isfinite(c)):
            raise MalformedProblem('Objetivo com coeficientes não finitos')
        rows, relations, bounds = [], [], []
        for k, constraint in enumerate(problem.constraints):
            row = np.asarray(constraint.row, dtype=float).reshape(-1)
            if row.size != n:
                raise MalformedProblem(
                    f'Restrição {k} com {row.size} coeficientes; esperado {n}'
                )
            bound = float(constraint.bound)
            if not (np.all(np.isfinite(row)) and np.isfinite(bound)):
                raise MalformedProblem(f'Restrição {k} com valor não finito')
            rows.append(row)
            relations.append(Relation(constraint.relation))
            bounds.append(bound)
        A = np.vstack(rows) if rows else np.zeros((0, n))
        return c, A, relations, np.array(bounds)

    # ============== TABLEAU ==============

    @staticmethod
    def _pivot(T: np.ndarray, r: int, j: int) -> None:
        T[r] /= T[r, j]
        column = T[:, j].copy()
        column[r] = 0.0
        T -= np.outer(column, T[r])

    def _iterate(
        self, T: np.ndarray, basis: List[int], ncols: int, pivots: int
    ) -> Tuple[Optional[int], int]:
        """
        Itera até a otimalidade; retorna (coluna ilimitada ou None, pivôs)
        Linha de custos: z_j = c_B B⁻¹A_j − c_j (maximização)
        """
        tol = self.pivot_tol
        while True:
            entering = np.nonzero(T[-1, :ncols] < -tol)[0]
            if not entering.size:
                return None, pivots
            j = int(entering[0])
            column = T[:-1, j]
            rows = np.nonzero(column > tol)[0]
            if not rows.size:
                return j, pivots
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12]
            r = int(min(ties, key=lambda i: basis[i]))
            self._pivot(T, r, j)
            basis[r] = j
            pivots += 1
            if pivots > self.max_pivots:
                raise LPError(f'Limite de {self.max_pivots} pivôs excedido')

    # ============== SOLVE ==============

    def solve(self, problem: LPProblem) -> LPResult:
        c, A, relations, b = self._validate(problem)
        sense = Sense(problem.sense)
        objective = c if sense == Sense.MAXIMIZE else -c
        m, n = A.shape

        # lado direito não negativo
        flip = b < 0
        A = np.where(flip[:, None], -A, A)
        b = np.abs(b)
        relations = [
            {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(rel, rel)
            if flipped
            else rel
            for rel, flipped in zip(relations, flip)
        ]

        slack_rows = [
            i for i, rel in enumerate(relations) if rel != Relation.EQ
        ]
        art_rows = [i for i, rel in enumerate(relations) if rel != Relation.LE]
        first_slack = 2 * n
        first_art = first_slack + len(slack_rows)
        N = first_art + len(art_rows)

        T = np.zeros((m + 1, N + 1))
        T[:m, :n] = A
        T[:m, n : 2 * n] = -A
        T[:m, -1] = b
        basis = [0] * m
        slack_col, art_col = {}, {}
        for k, i in enumerate(slack_rows):
            col = first_slack + k
            T[i, col] = 1.0 if relations[i] == Relation.LE else -1.0
            slack_col[i] = col
            if relations[i] == Relation.LE:
                basis[i] = col
        for k, i in enumerate(art_rows):
            col = first_art + k
            T[i, col] = 1.0
            art_col[i] = col
            basis[i] = col

        pivots = 0
        if art_rows:
            # fase 1: maximizar −Σ artificiais
            T[-1, :] = -T[art_rows, :].sum(axis=0)
            T[-1, first_art:N] += 1.0
            _, pivots = self._iterate(T, basis, N, pivots)
            if T[-1, -1] < -self.feasibility_tol * (1.0 + np.abs(b).sum()):
                certificate = self._farkas_rows(
                    T, relations, slack_col, art_col
                )
                logger.debug('LP inviável após %d pivôs', pivots)
                return LPResult(
                    LPStatus.INFEASIBLE, certificate=certificate, pivots=pivots
                )
            T, basis = self._drive_out_artificials(T, basis, first_art)

        # fase 2
        c_std = np.zeros(N)
        c_std[:n] = objective
        c_std[n : 2 * n] = -objective
        c_basis = c_std[basis]
        T[-1, :N] = c_basis @ T[:-1, :N] - c_std
        T[-1, -1] = c_basis @ T[:-1, -1]
        unbounded, pivots = self._iterate(T, basis, first_art, pivots)

        if unbounded is not None:
            d = np.zeros(N)
            d[unbounded] = 1.0
            for i, col in enumerate(basis):
                d[col] = -T[i, unbounded]
            direction = d[:n] - d[n : 2 * n]
            logger.debug('LP ilimitado após %d pivôs', pivots)
            return LPResult(
                LPStatus.UNBOUNDED, direction=direction, pivots=pivots
            )

        std = np.zeros(N)
        std[basis] = T[:-1, -1]
        x = std[:n] - std[n : 2 * n]
        binding = self._check_feasible(problem, x)
        logger.debug('LP ótimo em %d pivôs', pivots)
        return LPResult(
            LPStatus.OPTIMAL,
            x=x,
            value=float(c @ x),
            binding=binding,
            pivots=pivots,
        )

    def _farkas_rows(self, T, relations, slack_col, art_col) -> List[int]:
        """Linhas com multiplicador de Farkas não nulo na fase 1"""
        rows = []
        for i, rel in enumerate(relations):
            if rel == Relation.LE:
                y = T[-1, slack_col[i]]
            else:
                y = T[-1, art_col[i]] - 1.0
            if abs(y) > self.pivot_tol:
                rows.append(i)
        return rows

    def _drive_out_artificials(
        self, T: np.ndarray, basis: List[int], first_art: int
    ) -> Tuple[np.ndarray, List[int]]:
        """Tira artificiais da base; linhas redundantes são descartadas"""
        redundant = []
        for r in range(len(basis)):
            if basis[r] < first_art:
                continue
            row = np.abs(T[r, :first_art])
            candidates = np.nonzero(row > self.pivot_tol)[0]
            if candidates.size:
                j = int(candidates[0])
                self._pivot(T, r, j)
                basis[r] = j
            else:
                redundant.append(r)
        if redundant:
            T = np.delete(T, redundant, axis=0)
            basis = [col for r, col in enumerate(basis) if r not in redundant]
        return T, basis

    def _check_feasible(self, problem: LPProblem, x: np.ndarray) -> List[int]:
        """Verifica todas as restrições a posteriori; retorna as ativas"""
        binding = []
        for k, constraint in enumerate(problem.constraints):
            lhs = float(np.dot(constraint.row, x))
            bound = float(constraint.bound)
            tol = self.feasibility_tol * (1.0 + abs(bound))
            relation = Relation(constraint.relation)
            if relation == Relation.LE:
                violated = lhs > bound + tol
            elif relation == Relation.GE:
                violated = lhs < bound - tol
            else:
                violated = abs(lhs - bound) > tol
            if violated:
                raise LPError(
                    f'Ótimo viola a restrição {k}: {lhs} {relation.value} '
                    f'{bound}'
                )
            if abs(lhs - bound) <= tol:
                binding.append(k)
        return binding


_default_solver: Optional[DenseSimplexSolver] = None


def solve(problem: LPProblem) -> LPResult:
    """Resolve com o resolvedor padrão"""
    global _default_solver
    if _default_solver is None:
        _default_solver = DenseSimplexSolver()
    return _default_solver.solve(problem)
