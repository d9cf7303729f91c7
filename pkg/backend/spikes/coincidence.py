"""Módulo de contagem de coincidências: contagem com atraso, força bruta e constelações binadas"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .exceptions import AsymmetricFunctionError, CapacityError, ParameterError
from .spike_data import PatternSubset, Trial, TrialSet, Window
from .utils import BIN_EDGE_TOLERANCE, BRUTE_FORCE_CAP, ConstellationMatch

logger = logging.getLogger(__name__)

# Tamanho máximo de cada bloco do produto cartesiano materializado
CHUNK_SIZE = 2**20


@dataclass(frozen=True)
class CoincidenceParams:
    """Atraso δ da contagem de coincidências."""

    delta: float

    def check(self, window: Window) -> None:
        """Verifica 0 < δ < (b − a)/2."""
        if not math.isfinite(self.delta) or self.delta <= 0:
            raise ParameterError(f"δ deve ser positivo, recebido {self.delta}")
        if self.delta >= window.length / 2:
            raise ParameterError(
                f"δ={self.delta} deve ser menor que (b − a)/2 = {window.length / 2}"
            )


def _as_params(params: "CoincidenceParams | float") -> CoincidenceParams:
    return params if isinstance(params, CoincidenceParams) else CoincidenceParams(float(params))


def _subset_trains(trial: Trial, subset: PatternSubset) -> list[np.ndarray]:
    subset.check(trial.neuron_count)
    return [trial.trains[p].times for p in subset.positions()]


# ================================================================================================ #
#                                     CONTAGEM COM ATRASO (RÁPIDA)                                 #
# ================================================================================================ #
def _upper_index(x: np.ndarray, anchors: np.ndarray, delta: float) -> np.ndarray:
    """
    Para cada âncora t, índice do primeiro x com x − t > δ.

    O searchsorted sobre t + δ pode errar de uma posição por arredondamento; o ajuste usa a
    mesma comparação x − t ≤ δ da força bruta.
    """
    n = x.size
    upper = np.searchsorted(x, anchors + delta, side="right")
    while True:
        back = (upper > 0) & (x[np.maximum(upper - 1, 0)] - anchors > delta)
        if not back.any():
            break
        upper[back] -= 1
    while True:
        ahead = (upper < n) & (x[np.minimum(upper, n - 1)] - anchors <= delta)
        if not ahead.any():
            break
        upper[ahead] += 1
    return upper


def delayed_count(trial: Trial, subset: PatternSubset, params: "CoincidenceParams | float") -> int:
    """
    Contagem com atraso X_𝓛: número de L-uplas (um spike por neurônio de 𝓛) com
    max − min ≤ δ.

    Cada upla é contada uma única vez pelo seu menor elemento na ordem (tempo, posição no
    padrão). Para cada spike âncora t do neurônio j multiplicam-se as contagens dos demais
    neurônios: spikes em [t, t + δ] para posições depois de j e em (t, t + δ] para posições
    antes de j. Empates entre neurônios (injeção) ficam assim contados uma vez.
    """
    params = _as_params(params)
    params.check(trial.window)
    trains = _subset_trains(trial, subset)
    if any(x.size == 0 for x in trains):
        return 0

    total = 0
    for j, anchors in enumerate(trains):
        product = np.ones(anchors.size, dtype=np.int64)
        for i, x in enumerate(trains):
            if i == j:
                continue
            side = "left" if i > j else "right"
            lower = np.searchsorted(x, anchors, side=side)
            upper = _upper_index(x, anchors, params.delta)
            product *= np.maximum(upper - lower, 0)
        total += int(product.sum())
    return total


# ================================================================================================ #
#                                        FORÇA BRUTA / GENÉRICA                                    #
# ================================================================================================ #
def _check_cap(trains: Sequence[np.ndarray], cap: int) -> int:
    size = math.prod(int(x.size) for x in trains)
    if size > cap:
        raise CapacityError(f"Produto cartesiano de {size} uplas excede o limite de {cap}")
    return size


def _first_blocks(trains: Sequence[np.ndarray]):
    """Divide o primeiro trem em blocos cujo produto com os demais cabe em CHUNK_SIZE."""
    first, rest = trains[0], trains[1:]
    rest_size = max(math.prod(int(x.size) for x in rest), 1)
    block = max(1, CHUNK_SIZE // rest_size)
    for start in range(0, first.size, block):
        yield first[start : start + block], rest


def delayed_count_bruteforce(
    trial: Trial,
    subset: PatternSubset,
    params: "CoincidenceParams | float",
    cap: int = BRUTE_FORCE_CAP,
) -> int:
    """Referência: enumera todo o produto cartesiano e aplica 1{max − min ≤ δ}."""
    params = _as_params(params)
    params.check(trial.window)
    trains = _subset_trains(trial, subset)
    size = _check_cap(trains, cap)
    if size == 0:
        return 0
    logger.debug("Força bruta sobre %d uplas do padrão %s", size, subset.label)

    total = 0
    for block, rest in _first_blocks(trains):
        high = low = block
        for x in rest:
            high = np.maximum.outer(high, x).ravel()
            low = np.minimum.outer(low, x).ravel()
        total += int(np.count_nonzero(high - low <= params.delta))
    return total


class CoincidenceFunction(ABC):
    """
    Função de coincidência simétrica c: [a, b]^L → {0, 1}.

    Avaliada de forma vetorizada: recebe um array (N, L) de uplas e retorna N valores 0/1.
    """

    @abstractmethod
    def __call__(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class DelayWindowFunction(CoincidenceFunction):
    """c_δ(x) = 1{max x − min x ≤ δ}."""

    def __init__(self, delta: float) -> None:
        self.delta = float(delta)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return (points.max(axis=1) - points.min(axis=1)) <= self.delta


class ConstantFunction(CoincidenceFunction):
    """c ≡ 0 ou c ≡ 1."""

    def __init__(self, value: bool) -> None:
        self.value = bool(value)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[0], self.value)


class CallableFunction(CoincidenceFunction):
    """Envolve qualquer função vetorizada (N, L) → N."""

    def __init__(self, func: Callable[[np.ndarray], np.ndarray]) -> None:
        self.func = func

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(points))


def check_symmetry(
    c: CoincidenceFunction,
    size: int,
    window: Window,
    rng: np.random.Generator | None = None,
    samples: int = 2000,
    permutations: int = 10,
) -> None:
    """
    Verifica por amostragem que c é invariante por permutação dos argumentos.

    Metade das uplas é uniforme na janela e metade agrupada perto de um ponto comum, para
    exercitar as duas regiões de uma função de coincidência.
    """
    rng = rng if rng is not None else np.random.default_rng(0)
    spread = window.length * 0.01
    uniform = rng.uniform(window.a, window.b, size=(samples // 2, size))
    base = rng.uniform(window.a, window.b - spread, size=(samples - samples // 2, 1))
    clustered = base + rng.uniform(0.0, spread, size=(samples - samples // 2, size))
    points = np.vstack([uniform, clustered])

    reference = np.asarray(c(points), dtype=bool)
    for _ in range(permutations):
        perm = rng.permutation(size)
        if not np.array_equal(reference, np.asarray(c(points[:, perm]), dtype=bool)):
            raise AsymmetricFunctionError(
                f"Função de coincidência não é simétrica para a permutação {perm.tolist()}"
            )


def generic_count(
    trial: Trial,
    subset: PatternSubset,
    c: CoincidenceFunction,
    cap: int = BRUTE_FORCE_CAP,
    strict: bool = False,
) -> int:
    """
    Contagem de coincidências sob uma função simétrica qualquer, pelo produto cartesiano.

    Com strict=True a simetria de c é verificada por amostragem antes da contagem.
    """
    trains = _subset_trains(trial, subset)
    if strict:
        check_symmetry(c, subset.size, trial.window)
    if _check_cap(trains, cap) == 0:
        return 0

    total = 0
    for block, rest in _first_blocks(trains):
        grid = np.meshgrid(block, *rest, indexing="ij")
        points = np.stack([g.ravel() for g in grid], axis=1)
        total += int(np.count_nonzero(c(points)))
    return total


# ================================================================================================ #
#                                        CONSTELAÇÕES BINADAS                                      #
# ================================================================================================ #
@dataclass(frozen=True)
class BinnedTrial:
    """Matriz 0/1 de n neurônios × ⌊(b − a)/Δ⌋ bins (recorte: 1 se houve ao menos um spike)."""

    matrix: np.ndarray
    bin_width: float

    @property
    def neuron_count(self) -> int:
        """Número de linhas (neurônios)."""
        return int(self.matrix.shape[0])

    @property
    def bin_count(self) -> int:
        """Número de colunas (bins)."""
        return int(self.matrix.shape[1])


def bin_count_for(window: Window, bin_width: float) -> int:
    """Número de bins inteiros de largura Δ na janela (bin parcial final descartado)."""
    if not math.isfinite(bin_width) or bin_width <= 0:
        raise ParameterError(f"Largura de bin deve ser positiva, recebida {bin_width}")
    if bin_width >= window.length:
        raise ParameterError(
            f"Largura de bin {bin_width} deve ser menor que b − a = {window.length}"
        )
    return int(math.floor(window.length / bin_width + BIN_EDGE_TOLERANCE))


def bin_trial(trial: Trial, bin_width: float) -> BinnedTrial:
    """
    Bina e recorta um trial. O bin j cobre [a + jΔ, a + (j+1)Δ); o último bin é fechado à
    direita e o bin parcial final é descartado.
    """
    bins = bin_count_for(trial.window, bin_width)
    matrix = np.zeros((trial.neuron_count, bins), dtype=np.uint8)
    right_edge = bins * bin_width * (1 + BIN_EDGE_TOLERANCE)

    for row, train in enumerate(trial.trains):
        offsets = train.times - trial.window.a
        index = np.floor(offsets / bin_width).astype(np.int64)
        index[(index == bins) & (offsets <= right_edge)] = bins - 1
        index = index[(index >= 0) & (index < bins)]
        matrix[row, index] = 1

    return BinnedTrial(matrix, float(bin_width))


def bin_trial_set(ts: TrialSet, bin_width: float) -> list[BinnedTrial]:
    """Bina todos os trials de um conjunto."""
    return [bin_trial(trial, bin_width) for trial in ts.trials]


def constellation_for(subset: PatternSubset, neuron_count: int) -> np.ndarray:
    """Constelação w ∈ {0,1}ⁿ com 1 nas posições do padrão."""
    subset.check(neuron_count)
    w = np.zeros(neuron_count, dtype=np.uint8)
    w[subset.positions()] = 1
    return w


def constellation_count(
    bt: BinnedTrial,
    w: Sequence[int] | np.ndarray,
    match: ConstellationMatch | str = ConstellationMatch.EXACT,
) -> int:
    """
    Número m_w de bins cuja coluna corresponde à constelação w.

    EXACT exige 1 nas posições de 𝓛(w) e 0 nas demais; MARGINAL exige apenas os 1.
    """
    w = np.asarray(w, dtype=np.uint8).reshape(-1)
    if w.size != bt.neuron_count:
        raise ParameterError(
            f"Constelação de tamanho {w.size} para {bt.neuron_count} neurônios"
        )
    match = ConstellationMatch(match)

    if match is ConstellationMatch.EXACT:
        return int(np.count_nonzero((bt.matrix == w[:, None]).all(axis=0)))

    ones = w.astype(bool)
    return int(np.count_nonzero(bt.matrix[ones].all(axis=0)))
