"""Hierarquia de erros da análise de coincidências"""


class CoincideError(Exception):
    """Erro base de todas as operações da biblioteca."""


class SpikeDataError(CoincideError, ValueError):
    """Arquivo ou estrutura de spikes inválida (leitura, parse, validação)."""

    def __init__(self, message: str, violations: list | None = None) -> None:
        super().__init__(message)
        self.violations = violations or []


class ParameterError(CoincideError, ValueError):
    """Parâmetro fora do domínio de uma operação (δ, L, k, α, ...)."""


class AsymmetricFunctionError(ParameterError):
    """Função de coincidência que não é simétrica nas permutações amostradas."""


class CapacityError(CoincideError):
    """Limite de custo excedido (produto cartesiano, subconjuntos, neurônios)."""


class ExplosionError(CapacityError):
    """Simulação de Hawkes com número de eventos acima do limite."""


class DegenerateStatisticError(CoincideError):
    """Estatística de teste indefinida para os dados fornecidos."""

    flag = None


class ZeroIntensityError(DegenerateStatisticError):
    """Algum neurônio do padrão não tem nenhum spike (λ̂ = 0)."""

    flag = "zero_intensity"


class DegenerateVarianceError(DegenerateStatisticError):
    """Variância plug-in σ̂² ≤ 0."""

    flag = "degenerate_variance"

    def __init__(self, message: str, computation=None) -> None:
        super().__init__(message)
        self.computation = computation


class ThinningBoundError(CoincideError, RuntimeError):
    """Intensidade total acima do limite superior usado no afinamento de Ogata."""
