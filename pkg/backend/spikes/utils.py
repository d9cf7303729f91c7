"""Módulo com variáveis globais, constantes e tipos enumerados"""

from enum import Enum

# ================================================================================================ #
#                                      PARÂMETROS PADRÃO                                           #
# ================================================================================================ #
# Atraso das coincidências (s), fixado uma vez por todas
DEFAULT_DELTA = 0.01
DEFAULT_ALPHA = 0.05
DEFAULT_Q = 0.05

# Monte-Carlo
DEFAULT_REPETITIONS = 1000
DESK_REPETITIONS = 200
DEFAULT_M_GRID = tuple(range(10, 101, 10))
DEFAULT_SORTED_M = 50
DEFAULT_BATCH_SIZE = 50

# Limites
BRUTE_FORCE_CAP = 10**7
MAX_SUBSET_SIZE = 20
MULTI_PATTERN_MAX_NEURONS = 10
HAWKES_EVENT_CAP = 10**6
QUADRATURE_MAX_L = 4
MIN_MC_SAMPLES = 10**3
DEFAULT_MC_SAMPLES = 10**6

# Tolerância usada na contagem de bins inteiros de uma janela
BIN_EDGE_TOLERANCE = 1e-9

# ================================================================================================ #
#                                          FRAMEWORKS                                              #
# ================================================================================================ #
DURATION_RANGE = (0.2, 0.4)
RATE_RANGE = (8.0, 20.0)
NEURON_COUNT = 4
INJECTION_RATE = 0.3
REFRACTORY_PERIOD = 0.003
INTERACTION_SUPPORT = 0.005
INTERACTION_HEIGHT_RANGE = (20.0, 30.0)

# Arestas excitatórias (fonte, alvo) do grafo de independência local do F4
F4_EDGES = ((1, 3), (2, 3), (1, 4), (2, 4), (3, 4))

# Grades do parameter scan
DEFAULT_LAMBDA_GRID = (8.0, 15.0, 20.0)
DEFAULT_DURATION_GRID = (0.2, 0.3, 0.4)


class Framework(Enum):
    """Frameworks de simulação (F1 e F2 Poisson, F3 e F4 Hawkes)."""

    F1 = "F1"
    F2 = "F2"
    F3 = "F3"
    F4 = "F4"


class TestMethod(Enum):
    """Métodos de teste de independência."""

    __test__ = False  # não é uma classe de teste

    GAUE = "gaue"
    UE = "ue"


class DependenceSign(Enum):
    """Sinal da dependência detectada."""

    EXCITATORY = "excitatory"
    INHIBITORY = "inhibitory"
    NONE = "none"


class Reference(Enum):
    """Distribuições de referência da distância KS."""

    STD_NORMAL = "std_normal"
    UNIFORM01 = "uniform01"


class CurveKind(Enum):
    """Tipos de curva emitidos pelo harness."""

    KS_VS_M = "ks_vs_M"
    SORTED_PVALUES = "sorted_pvalues"
    RATE_VS_M = "rate_vs_M"
    DETECTION_HISTOGRAM = "detection_histogram"


class FileFormat(Enum):
    """Formatos de arquivo de TrialSet."""

    CSV = "csv"
    JSON = "json"


class ConstellationMatch(Enum):
    """Semântica da contagem de constelações."""

    EXACT = "exact"  # 1 nos neurônios de L(w) E 0 nos demais
    MARGINAL = "marginal"  # apenas 1 nos neurônios de L(w)


class OracleMethod(Enum):
    """Métodos numéricos do oráculo de I(L,k)."""

    QUADRATURE = "quadrature"
    MONTE_CARLO = "monte_carlo"


class OutcomeFlag(Enum):
    """Sinalizações anexadas a um resultado de teste."""

    ZERO_INTENSITY = "zero_intensity"
    DEGENERATE_VARIANCE = "degenerate_variance"
    DEGENERATE_NULL = "degenerate_null"


class ViolationKind(Enum):
    """Tipos de violação reportados por spike_data.validate."""

    EMPTY_TRIAL_SET = "empty trial set"
    NO_NEURONS = "no neurons"
    NOT_SORTED = "not sorted"
    DUPLICATE_TIME = "duplicate spike time"
    OUTSIDE_WINDOW = "time outside window"
    NEURON_COUNT = "inconsistent neuron count"
    WINDOW_LENGTH = "inconsistent window length"
    NOT_FINITE = "non-finite time"
