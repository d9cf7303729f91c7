"""Módulo de simulação: Poisson, injeção e Hawkes com núcleos constantes por partes"""

import json
import logging
import os
from bisect import bisect_left
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import ExplosionError, ParameterError, ThinningBoundError
from .spike_data import SpikeTrain, Trial, TrialSet, Window, sidecar_path, write_trial_set
from .utils import (
    DEFAULT_DELTA,
    DURATION_RANGE,
    F4_EDGES,
    HAWKES_EVENT_CAP,
    INJECTION_RATE,
    INTERACTION_HEIGHT_RANGE,
    INTERACTION_SUPPORT,
    NEURON_COUNT,
    RATE_RANGE,
    REFRACTORY_PERIOD,
    FileFormat,
    Framework,
)

logger = logging.getLogger(__name__)

# Folga relativa no teste de que a intensidade não excede o limite superior
BOUND_TOLERANCE = 1e-9


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """
    Gerador Philox (baseado em contador) derivado de (seed, *keys).

    Repetições usam keys=(r,) e trials keys=(r, t): cada sub-fluxo é independente da ordem em
    que os workers o consomem.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(sequence))


def draw_seed() -> int:
    """Semente de 32 bits tirada da entropia do sistema, para execuções sem --seed."""
    return int(np.random.SeedSequence().entropy % 2**32)


# ================================================================================================ #
#                                               POISSON                                            #
# ================================================================================================ #
def sim_poisson(rate: float, window: Window, rng: np.random.Generator) -> SpikeTrain:
    """Processo de Poisson homogêneo: N ~ Poisson(λ(b − a)) tempos uniformes ordenados."""
    if rate < 0:
        raise ParameterError(f"Taxa negativa: {rate}")
    count = rng.poisson(rate * window.length)
    return SpikeTrain(np.sort(rng.uniform(window.a, window.b, size=count)))


def sim_injection(
    base_rates: Sequence[float],
    inject_rate: float,
    window: Window,
    rng: np.random.Generator,
) -> Trial:
    """Poisson independentes N̄_i unidos a um mesmo processo injetado Ñ em todos os neurônios."""
    if inject_rate < 0:
        raise ParameterError(f"Taxa de injeção negativa: {inject_rate}")
    own = [sim_poisson(rate, window, rng) for rate in base_rates]
    injected = sim_poisson(inject_rate, window, rng).times
    trains = tuple(SpikeTrain(np.sort(np.concatenate([t.times, injected]))) for t in own)
    return Trial(trains, window)


# ================================================================================================ #
#                                               HAWKES                                             #
# ================================================================================================ #
@dataclass(frozen=True)
class PiecewiseConstKernel:
    """Núcleo β·1_[0,x]: altura β (Hz, negativa para inibição) e suporte x (s)."""

    height: float
    support: float

    def __post_init__(self) -> None:
        if not self.support > 0:
            raise ParameterError(f"Suporte do núcleo deve ser positivo: {self.support}")


@dataclass(frozen=True)
class HawkesModel:
    """
    Hawkes multivariado: taxas espontâneas μ_j e núcleos h_ij (influência de i sobre j).

    `kernels[i][j]` é None quando não há interação (índices a partir de 0).
    """

    mu: tuple[float, ...]
    kernels: tuple[tuple[PiecewiseConstKernel | None, ...], ...]

    def __post_init__(self) -> None:
        mu = tuple(float(m) for m in self.mu)
        if any(m < 0 for m in mu):
            raise ParameterError(f"Taxas espontâneas devem ser ≥ 0: {mu}")
        kernels = tuple(tuple(row) for row in self.kernels)
        if len(kernels) != len(mu) or any(len(row) != len(mu) for row in kernels):
            raise ParameterError("Matriz de núcleos incompatível com o número de neurônios")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "kernels", kernels)

    @classmethod
    def independent(cls, mu: Sequence[float]) -> "HawkesModel":
        """Modelo sem nenhum núcleo (Poisson homogêneos)."""
        size = len(mu)
        return cls(tuple(mu), tuple((None,) * size for _ in range(size)))

    @property
    def size(self) -> int:
        """Número de neurônios."""
        return len(self.mu)

    @property
    def is_independent(self) -> bool:
        """Independência ⟺ nenhum núcleo fora da diagonal."""
        return all(
            self.kernels[i][j] is None
            for i in range(self.size)
            for j in range(self.size)
            if i != j
        )

    def links(self) -> list[tuple[int, int, float, float]]:
        """Lista (i, j, β, x) dos núcleos presentes."""
        return [
            (i, j, kernel.height, kernel.support)
            for i, row in enumerate(self.kernels)
            for j, kernel in enumerate(row)
            if kernel is not None
        ]


class _HawkesState:
    """Histórico de eventos e avaliação exata das intensidades."""

    def __init__(self, model: HawkesModel) -> None:
        self.mu = np.array(model.mu)
        self.links = model.links()
        self.history: list[list[float]] = [[] for _ in range(model.size)]

    def _active(self, source: int, start: float, stop: float | None = None) -> int:
        events = self.history[source]
        first = bisect_left(events, start)
        last = len(events) if stop is None else bisect_left(events, stop)
        return last - first

    def intensities(self, t: float) -> np.ndarray:
        """λ_t^j = max(0, μ_j + Σ_i β_ij #{s ∈ N^i : t − x_ij ≤ s < t})."""
        raw = self.mu.copy()
        for i, j, height, support in self.links:
            raw[j] += height * self._active(i, t - support, t)
        return np.maximum(raw, 0.0)

    def upper_bound(self, t: float) -> float:
        """Σ_j μ_j mais as contribuições positivas ainda ativas após t."""
        bound = float(self.mu.sum())
        for i, _, height, support in self.links:
            if height > 0:
                bound += height * self._active(i, t - support)
        return bound


def sim_hawkes(
    model: HawkesModel,
    window: Window,
    rng: np.random.Generator,
    burn_in: float = 0.0,
    event_cap: int = HAWKES_EVENT_CAP,
) -> Trial:
    """
    Simula um Hawkes multivariado pelo método de afinamento de Ogata.

    Parâmetros:
    model (HawkesModel): Taxas espontâneas e núcleos.
    window (Window): Janela [a, b] do trial; o histórico antes de a − burn_in é vazio.
    rng (Generator): Gerador de números aleatórios.
    burn_in (float): Duração simulada antes de a e descartada.
    event_cap (int): Número máximo de eventos aceitos por trial.

    Retorna:
    Trial: Os trens registrados em [a, b].

    Levanta:
    ExplosionError: mais de event_cap eventos.
    """
    if burn_in < 0:
        raise ParameterError(f"Burn-in negativo: {burn_in}")
    state = _HawkesState(model)
    t = window.a - burn_in
    accepted = 0

    while True:
        bound = state.upper_bound(t)
        if bound <= 0:
            break
        t += rng.exponential(1.0 / bound)
        if t > window.b:
            break

        intensity = state.intensities(t)
        total = float(intensity.sum())
        if total > bound * (1 + BOUND_TOLERANCE):
            raise ThinningBoundError(
                f"Intensidade {total:.6g} acima do limite {bound:.6g} em t={t}"
            )

        u = rng.uniform() * bound
        if u > total:
            continue  # candidato rejeitado

        neuron = int(np.searchsorted(np.cumsum(intensity), u, side="right"))
        neuron = min(neuron, model.size - 1)
        state.history[neuron].append(t)
        accepted += 1
        if accepted > event_cap:
            raise ExplosionError(f"Simulação de Hawkes excedeu {event_cap} eventos")

    trains = tuple(
        SpikeTrain(np.array([s for s in events if s >= window.a])) for events in state.history
    )
    return Trial(trains, window)


def in_degrees(size: int, edges: Sequence[tuple[int, int]]) -> list[int]:
    """m_j: número de neurônios que excitam j (arestas numeradas a partir de 1)."""
    degrees = [0] * size
    for _, target in edges:
        degrees[target - 1] += 1
    return degrees


def build_hawkes_model(
    framework: Framework | str, mu: Sequence[float], beta: float | None = None
) -> HawkesModel:
    """
    Estrutura de interação de F3 e F4.

    F3: refratário h_ii = −μ_i 1_[0,0.003]. F4: cinco núcleos excitatórios β·1_[0,0.005]
    (1→3, 2→3, 1→4, 2→4, 3→4) e refratário h_ii = −(μ_i + m_i β) 1_[0,0.003].
    """
    framework = Framework(framework)
    size = len(mu)
    kernels: list[list[PiecewiseConstKernel | None]] = [[None] * size for _ in range(size)]

    if framework is Framework.F3:
        for i, m in enumerate(mu):
            kernels[i][i] = PiecewiseConstKernel(-m, REFRACTORY_PERIOD)
    elif framework is Framework.F4:
        if beta is None:
            raise ParameterError("F4 exige a altura β dos núcleos excitatórios")
        degrees = in_degrees(size, F4_EDGES)
        for source, target in F4_EDGES:
            kernels[source - 1][target - 1] = PiecewiseConstKernel(beta, INTERACTION_SUPPORT)
        for i, m in enumerate(mu):
            kernels[i][i] = PiecewiseConstKernel(-(m + degrees[i] * beta), REFRACTORY_PERIOD)
    else:
        raise ParameterError(f"{framework.value} não é um framework de Hawkes")

    return HawkesModel(tuple(mu), tuple(tuple(row) for row in kernels))


# ================================================================================================ #
#                                            FRAMEWORKS                                            #
# ================================================================================================ #
@dataclass(frozen=True)
class FrameworkConfig:
    """
    Configuração de um framework de simulação.

    `duration`, `rate` e `beta` fixam os parâmetros sorteados (parameter scan); valores fora
    dos intervalos do framework exigem allow_out_of_range=True.
    """

    framework: Framework
    M: int  # pylint: disable=invalid-name
    seed: int = 0
    duration: float | None = None
    rate: float | None = None
    beta: float | None = None
    allow_out_of_range: bool = False
    delta: float = DEFAULT_DELTA
    burn_in: float = 0.0
    event_cap: int = HAWKES_EVENT_CAP

    def __post_init__(self) -> None:
        object.__setattr__(self, "framework", Framework(self.framework))
        if self.M < 1:
            raise ParameterError(f"M deve ser ≥ 1, recebido {self.M}")
        checks = (
            ("duration", self.duration, DURATION_RANGE),
            ("rate", self.rate, RATE_RANGE),
            ("beta", self.beta, INTERACTION_HEIGHT_RANGE),
        )
        for name, value, (low, high) in checks:
            if value is None:
                continue
            if value <= 0:
                raise ParameterError(f"{name} deve ser positivo, recebido {value}")
            if not self.allow_out_of_range and not low <= value <= high:
                raise ParameterError(
                    f"{name}={value} fora do intervalo [{low}, {high}] de {self.framework.value}"
                )

    def replace(self, **changes) -> "FrameworkConfig":
        """Cópia com campos alterados."""
        return FrameworkConfig(**{**asdict(self), **changes})

    def to_dict(self) -> dict:
        """Forma JSON da configuração."""
        return {**asdict(self), "framework": self.framework.value}


@dataclass(frozen=True)
class SampledParameters:
    """Parâmetros sorteados em uma repetição (passo 1 do procedimento)."""

    framework: Framework
    seed: int
    repetition: int
    duration: float
    rates: tuple[float, ...]
    inject_rate: float = 0.0
    beta: float | None = None
    delta: float = DEFAULT_DELTA

    @property
    def window(self) -> Window:
        """Janela [0, duração]."""
        return Window(0.0, self.duration)

    def to_dict(self) -> dict:
        """Forma JSON dos parâmetros."""
        return {**asdict(self), "framework": self.framework.value, "rates": list(self.rates)}


def sample_parameters(cfg: FrameworkConfig, repetition: int = 0) -> SampledParameters:
    """Sorteia duração, taxas e β de uma repetição, respeitando os valores fixados em cfg."""
    rng = make_rng(cfg.seed, repetition)
    duration = rng.uniform(*DURATION_RANGE)
    rates = rng.uniform(*RATE_RANGE, size=NEURON_COUNT)
    beta = rng.uniform(*INTERACTION_HEIGHT_RANGE)

    if cfg.duration is not None:
        duration = cfg.duration
    if cfg.rate is not None:
        rates = np.full(NEURON_COUNT, cfg.rate)
    if cfg.beta is not None:
        beta = cfg.beta

    return SampledParameters(
        framework=cfg.framework,
        seed=cfg.seed,
        repetition=repetition,
        duration=float(duration),
        rates=tuple(float(r) for r in rates),
        inject_rate=INJECTION_RATE if cfg.framework is Framework.F2 else 0.0,
        beta=float(beta) if cfg.framework is Framework.F4 else None,
        delta=cfg.delta,
    )


def simulate_trial(
    cfg: FrameworkConfig, params: SampledParameters, rng: np.random.Generator
) -> Trial:
    """Gera um trial a partir dos parâmetros sorteados."""
    window = params.window
    if cfg.framework is Framework.F1:
        return Trial(tuple(sim_poisson(r, window, rng) for r in params.rates), window)
    if cfg.framework is Framework.F2:
        return sim_injection(params.rates, params.inject_rate, window, rng)
    model = build_hawkes_model(cfg.framework, params.rates, params.beta)
    return sim_hawkes(model, window, rng, burn_in=cfg.burn_in, event_cap=cfg.event_cap)


def sample_framework(
    cfg: FrameworkConfig, repetition: int = 0, trials: int | None = None
) -> tuple[TrialSet, SampledParameters]:
    """
    Sorteia um vetor de parâmetros e gera M trials com ele.

    Parâmetros:
    cfg (FrameworkConfig): Framework, M e semente.
    repetition (int): Índice da repetição; define os sub-fluxos do gerador.
    trials (int | None): Número de trials a gerar, quando diferente de cfg.M.

    Retorna:
    tuple[TrialSet, SampledParameters]: Os trials e os parâmetros usados.
    """
    params = sample_parameters(cfg, repetition)
    count = cfg.M if trials is None else trials
    generated = tuple(
        simulate_trial(cfg, params, make_rng(cfg.seed, repetition, k)) for k in range(count)
    )
    logger.debug(
        "%s repetição %d: %d trials em [0, %.4f]",
        cfg.framework.value,
        repetition,
        count,
        params.duration,
    )
    return TrialSet(generated, NEURON_COUNT), params


def write_simulation(
    ts: TrialSet,
    params: SampledParameters,
    path: str | os.PathLike,
    file_format: FileFormat | str | None = None,
) -> tuple[Path, Path]:
    """Escreve o TrialSet e o sidecar `<arquivo>.params.json` com os parâmetros sorteados."""
    data_path = write_trial_set(ts, path, file_format)
    params_path = sidecar_path(data_path, ".params.json")
    with open(params_path, "w", encoding="utf-8") as fh:
        json.dump(params.to_dict(), fh, indent=2, sort_keys=True)
    return data_path, params_path
