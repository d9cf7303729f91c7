"""Módulo com os testes de independência: GAUE, Unitary Events binado e Benjamini-Hochberg"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .closed_form import I_Lk, IntensityVector, relative_delay, theoretical_moments
from .coincidence import (
    BinnedTrial,
    CoincidenceParams,
    bin_trial_set,
    constellation_count,
    constellation_for,
    delayed_count,
)
from .exceptions import (
    CapacityError,
    DegenerateStatisticError,
    DegenerateVarianceError,
    ParameterError,
    ZeroIntensityError,
)
from .spike_data import PatternSubset, TrialSet, Window, all_patterns
from .utils import (
    DEFAULT_ALPHA,
    DEFAULT_DELTA,
    DEFAULT_Q,
    MULTI_PATTERN_MAX_NEURONS,
    ConstellationMatch,
    DependenceSign,
    OutcomeFlag,
    TestMethod,
)

logger = logging.getLogger(__name__)


def _check_level(value: float, name: str) -> float:
    value = float(value)
    if not 0 < value < 1:
        raise ParameterError(f"{name} deve estar em (0, 1), recebido {value}")
    return value


# ================================================================================================ #
#                                        RESULTADO DE UM TESTE                                     #
# ================================================================================================ #
@dataclass(frozen=True)
class TestOutcome:
    """
    Resultado de um teste de independência sobre um padrão.

    `excess` guarda o sinal do desvio observado (m̄ − m̂₀ no GAUE, observado − esperado no UE),
    usado para o sinal da dependência quando a hipótese é rejeitada.

    No GAUE `reject` equivale a p ≤ α. No UE `reject` segue a regra dos quantis da Poisson e
    `p_value` (caudas dobradas) serve apenas para relatório e como entrada de Benjamini-Hochberg;
    os dois podem discordar perto da fronteira (média 5, observado 1: rejeita com p ≈ 0.081).
    """

    __test__ = False  # não é uma classe de teste

    pattern: PatternSubset
    method: TestMethod
    statistic: float
    p_value: float
    reject: bool
    sign: DependenceSign
    excess: float = 0.0
    flags: tuple[OutcomeFlag, ...] = ()
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        """Linha JSON: {pattern, statistic, p, reject, sign, flags}."""
        return {
            "pattern": list(self.pattern.indices),
            "method": self.method.value,
            "statistic": self.statistic if math.isfinite(self.statistic) else None,
            "p": self.p_value,
            "reject": self.reject,
            "sign": self.sign.value,
            "flags": [flag.value for flag in self.flags],
            **self.details,
        }


def dependence_sign(reject: bool, excess: float) -> DependenceSign:
    """Excitatória se houve excesso de coincidências, inibitória se houve falta."""
    if not reject:
        return DependenceSign.NONE
    return DependenceSign.EXCITATORY if excess > 0 else DependenceSign.INHIBITORY


def degenerate_outcome(
    pattern: PatternSubset, method: TestMethod, error: DegenerateStatisticError
) -> TestOutcome:
    """Resultado de um teste indefinido: p = 1, sem rejeição, com a sinalização do erro."""
    return TestOutcome(
        pattern=pattern,
        method=method,
        statistic=float("nan"),
        p_value=1.0,
        reject=False,
        sign=DependenceSign.NONE,
        flags=(OutcomeFlag(error.flag),),
        details={"error": str(error)},
    )


# ================================================================================================ #
#                                               GAUE                                               #
# ================================================================================================ #
def estimate_lambdas(ts: TrialSet, subset: PatternSubset | None = None) -> IntensityVector:
    """
    λ̂_l = (1 / (M(b − a))) Σ_k N_l^{(k)}([a, b]), agregado sobre todos os trials.

    Sem padrão, retorna as intensidades de todos os neurônios.
    """
    if ts.M < 1:
        raise ParameterError("Estimativa de intensidade exige ao menos um trial")
    rates = ts.total_counts() / (ts.M * ts.window_length)
    if subset is None:
        return IntensityVector(tuple(range(1, ts.neuron_count + 1)), rates)
    subset.check(ts.neuron_count)
    return IntensityVector(subset.indices, rates[subset.positions()])


@dataclass(frozen=True)
class GaueComputation:
    """Quantidades intermediárias da estatística GAUE."""

    m_bar: float
    lambda_hats: IntensityVector
    m0_hat: float
    v_hat: float
    sigma2_hat: float
    statistic: float
    M: int  # pylint: disable=invalid-name
    counts: tuple[int, ...] = field(default=(), compare=False)

    def to_dict(self) -> dict:
        """Forma JSON, sem as contagens por trial."""
        return {
            "m_bar": self.m_bar,
            "lambda_hats": self.lambda_hats.to_dict(),
            "m0_hat": self.m0_hat,
            "v_hat": self.v_hat,
            "sigma2_hat": self.sigma2_hat,
            "statistic": self.statistic if math.isfinite(self.statistic) else None,
            "M": self.M,
        }


def gaue_compute(
    ts: TrialSet, subset: PatternSubset, delta: float = DEFAULT_DELTA
) -> GaueComputation:
    """
    Calcula m̄, m̂₀, v̂, σ̂² e a estatística √M(m̄ − m̂₀)/σ̂.

    Parâmetros:
    ts (TrialSet): M ≥ 2 trials.
    subset (PatternSubset): Padrão 𝓛 testado.
    delta (float): Atraso δ < (b − a)/2.

    Retorna:
    GaueComputation: Todas as quantidades do teste.

    Levanta:
    ZeroIntensityError: algum λ̂_l = 0.
    DegenerateVarianceError: σ̂² ≤ 0.
    """
    if ts.M < 2:
        raise ParameterError(f"O teste GAUE exige M ≥ 2 trials, recebido M={ts.M}")
    subset.check(ts.neuron_count)
    window = ts.window
    params = CoincidenceParams(float(delta))
    params.check(window)

    lambdas = estimate_lambdas(ts, subset)
    if np.any(lambdas.rates == 0):
        silent = [i for i, r in zip(lambdas.neurons, lambdas.rates) if r == 0]
        raise ZeroIntensityError(f"Intensidade estimada nula para os neurônios {silent}")

    counts = tuple(delayed_count(trial, subset, params) for trial in ts.trials)
    m_bar = float(np.mean(counts))

    # Contagens por janela e δ/(b − a): só a razão carrega a escala de tempo
    per_window = ts.total_counts()[subset.positions()] / ts.M
    unit, rho = Window(0.0, 1.0), relative_delay(window, params.delta)
    moments = theoretical_moments(per_window, subset, unit, rho)
    correction = (
        I_Lk(subset.size, subset.size, unit, rho)
        * math.prod(float(r) ** 2 for r in per_window)
        * float(np.sum(1.0 / per_window))
    )
    sigma2 = moments.variance - correction

    if sigma2 <= 0:
        computation = GaueComputation(
            m_bar, lambdas, moments.m0, moments.variance, sigma2, float("nan"), ts.M, counts
        )
        raise DegenerateVarianceError(
            f"Variância estimada σ̂²={sigma2:.6g} ≤ 0 para o padrão {subset}", computation
        )

    statistic = math.sqrt(ts.M) * (m_bar - moments.m0) / math.sqrt(sigma2)
    return GaueComputation(
        m_bar, lambdas, moments.m0, moments.variance, sigma2, statistic, ts.M, counts
    )


def gaussian_pvalue(statistic: float) -> float:
    """p-valor bilateral 2(1 − Φ(|T|))."""
    return float(min(1.0, 2.0 * stats.norm.sf(abs(statistic))))


def gaue_test(
    ts: TrialSet,
    subset: PatternSubset,
    delta: float = DEFAULT_DELTA,
    alpha: float = DEFAULT_ALPHA,
) -> TestOutcome:
    """Teste GAUE bilateral de nível α: rejeita a independência quando p ≤ α."""
    alpha = _check_level(alpha, "α")
    computation = gaue_compute(ts, subset, delta)
    p_value = gaussian_pvalue(computation.statistic)
    reject = p_value <= alpha
    excess = computation.m_bar - computation.m0_hat
    return TestOutcome(
        pattern=subset,
        method=TestMethod.GAUE,
        statistic=computation.statistic,
        p_value=p_value,
        reject=reject,
        sign=dependence_sign(reject, excess),
        excess=excess,
        details={"computation": computation.to_dict()},
    )


# ================================================================================================ #
#                                          UNITARY EVENTS                                          #
# ================================================================================================ #
def spike_probabilities(binned: Sequence[BinnedTrial]) -> np.ndarray:
    """p̂_i: probabilidade empírica de spike por bin, agregada sobre trials e bins."""
    if not binned or binned[0].bin_count == 0:
        raise ParameterError("Nenhum bin disponível para estimar as probabilidades")
    ones = np.sum([bt.matrix.sum(axis=1) for bt in binned], axis=0)
    return ones / (len(binned) * binned[0].bin_count)


def ue_expected_count(
    binned: Sequence[BinnedTrial],
    w: Sequence[int] | np.ndarray,
    match: ConstellationMatch | str = ConstellationMatch.EXACT,
) -> float:
    """
    m̂_{g,w} = (S/d) ∏_{l∈𝓛(w)} p̂_l ∏_{k∉𝓛(w)} (1 − p̂_k), contagem esperada por trial.

    Com match=MARGINAL o fator dos neurônios fora do padrão é omitido.
    """
    probabilities = spike_probabilities(binned)
    w = np.asarray(w, dtype=bool).reshape(-1)
    if w.size != probabilities.size:
        raise ParameterError(
            f"Constelação de tamanho {w.size} para {probabilities.size} neurônios"
        )

    expected = binned[0].bin_count * float(np.prod(probabilities[w]))
    if ConstellationMatch(match) is ConstellationMatch.EXACT:
        expected *= float(np.prod(1.0 - probabilities[~w]))
    return expected


def ue_pvalue(observed: int, mean: float) -> float:
    """p-valor de caudas dobradas min(1, 2·min(P(X ≤ obs), P(X ≥ obs))), X ~ Poisson(mean)."""
    if mean <= 0:
        return 1.0 if observed == 0 else 0.0
    lower = stats.poisson.cdf(observed, mean)
    upper = stats.poisson.sf(observed - 1, mean)
    return float(min(1.0, 2.0 * min(lower, upper)))


def poisson_quantile(x: float, mean: float) -> int:
    """Menor inteiro m com P(X ≤ m) ≥ x, X ~ Poisson(mean)."""
    return int(stats.poisson.ppf(x, mean))


def ue_test(
    ts: TrialSet,
    pattern: PatternSubset | Sequence[int],
    bin_width: float | None = None,
    alpha: float = DEFAULT_ALPHA,
    match: ConstellationMatch | str = ConstellationMatch.EXACT,
    delta: float = DEFAULT_DELTA,
) -> TestOutcome:
    """
    Teste Unitary Events binado.

    O total observado M·m̄_w é comparado aos quantis da Poisson(M·m̂_{g,w}): rejeita se
    obs ≥ q_{1−α/2} ou obs ≤ q_{α/2}. Sem largura de bin informada usa Δ = 2δ.

    Parâmetros:
    ts (TrialSet): Conjunto de trials (M ≥ 1).
    pattern (PatternSubset | Sequence[int]): Padrão ou constelação w ∈ {0,1}ⁿ.
    bin_width (float | None): Largura Δ dos bins.
    alpha (float): Nível do teste.
    match (ConstellationMatch): Contagem exata (padrão) ou marginal.
    delta (float): δ usado apenas para a largura padrão.

    Retorna:
    TestOutcome: A estatística reportada é o excesso padronizado (obs − μ)/√μ.
    """
    alpha = _check_level(alpha, "α")
    if ts.M < 1:
        raise ParameterError("O teste UE exige ao menos um trial")

    if isinstance(pattern, PatternSubset):
        w = constellation_for(pattern, ts.neuron_count)
    else:
        w = np.asarray(pattern, dtype=np.uint8).reshape(-1)
        ones = tuple(int(i) + 1 for i in np.flatnonzero(w))
        pattern = PatternSubset(ones)
    width = float(bin_width) if bin_width is not None else 2.0 * float(delta)

    binned = bin_trial_set(ts, width)
    observed = sum(constellation_count(bt, w, match) for bt in binned)
    mean = ts.M * ue_expected_count(binned, w, match)
    details = {"observed": observed, "expected": mean, "bin_width": width}

    if mean <= 0:
        reject = observed > 0
        flags = (OutcomeFlag.DEGENERATE_NULL,) if reject else ()
        return TestOutcome(
            pattern=pattern,
            method=TestMethod.UE,
            statistic=math.inf if reject else 0.0,
            p_value=ue_pvalue(observed, mean),
            reject=reject,
            sign=dependence_sign(reject, observed),
            excess=float(observed),
            flags=flags,
            details=details,
        )

    low = poisson_quantile(alpha / 2, mean)
    high = poisson_quantile(1 - alpha / 2, mean)
    reject = observed >= high or observed <= low
    excess = observed - mean
    details.update({"q_low": low, "q_high": high})
    return TestOutcome(
        pattern=pattern,
        method=TestMethod.UE,
        statistic=excess / math.sqrt(mean),
        p_value=ue_pvalue(observed, mean),
        reject=reject,
        sign=dependence_sign(reject, excess),
        excess=excess,
        details=details,
    )


# ================================================================================================ #
#                                        BENJAMINI-HOCHBERG                                        #
# ================================================================================================ #
@dataclass(frozen=True)
class BhResult:
    """Resultado do procedimento de Benjamini-Hochberg."""

    ordered: tuple[tuple[object, float], ...]
    k0: int
    rejected: frozenset
    q: float

    @property
    def K(self) -> int:  # pylint: disable=invalid-name
        """Número de testes."""
        return len(self.ordered)

    @property
    def threshold(self) -> float | None:
        """P₍k0₎, ou None quando nenhum teste é rejeitado."""
        return self.ordered[self.k0 - 1][1] if self.k0 else None

    def to_dict(self) -> dict:
        """Forma JSON do resultado."""
        return {
            "q": self.q,
            "K": self.K,
            "k0": self.k0,
            "threshold": self.threshold,
            "ordered": [[str(test_id), p] for test_id, p in self.ordered],
            "rejected": sorted(str(test_id) for test_id in self.rejected),
        }


def bh_procedure(
    pvalues: Mapping[object, float] | Iterable[tuple[object, float]], q: float = DEFAULT_Q
) -> BhResult:
    """
    Procedimento de Benjamini-Hochberg no nível q.

    Ordena os p-valores, encontra k0 = maior k com P₍ₖ₎ ≤ kq/K e rejeita todos os testes com
    p-valor ≤ P₍k0₎ (empates incluídos).
    """
    q = _check_level(q, "q")
    items = list(pvalues.items() if isinstance(pvalues, Mapping) else pvalues)
    if not items:
        raise ParameterError("Benjamini-Hochberg exige ao menos um p-valor")
    for test_id, p in items:
        if not 0.0 <= p <= 1.0:
            raise ParameterError(f"p-valor fora de [0, 1] para {test_id}: {p}")

    ordered = tuple(sorted(((test_id, float(p)) for test_id, p in items), key=lambda item: item[1]))
    size = len(ordered)
    k0 = 0
    for k, (_, p) in enumerate(ordered, start=1):
        if p <= k * q / size:
            k0 = k

    rejected = frozenset()
    if k0:
        cutoff = ordered[k0 - 1][1]
        rejected = frozenset(test_id for test_id, p in ordered if p <= cutoff)
    return BhResult(ordered=ordered, k0=k0, rejected=rejected, q=q)


# ================================================================================================ #
#                                          MÚLTIPLOS PADRÕES                                       #
# ================================================================================================ #
@dataclass(frozen=True)
class MultiPatternReport:
    """Testes sobre todos os sub-padrões e a decisão conjunta de Benjamini-Hochberg."""

    method: TestMethod
    outcomes: tuple[TestOutcome, ...]
    bh: BhResult

    def is_rejected(self, pattern: PatternSubset) -> bool:
        """Indica se o padrão foi rejeitado pelo procedimento BH."""
        return pattern.label in self.bh.rejected

    def rows(self) -> list[dict]:
        """Uma linha por padrão, com a decisão de BH em `reject`."""
        rows = []
        for outcome in self.outcomes:
            reject = self.is_rejected(outcome.pattern)
            row = outcome.to_dict()
            row.update(
                {"reject": reject, "sign": dependence_sign(reject, outcome.excess).value}
            )
            rows.append(row)
        return rows

    def to_dict(self) -> dict:
        """Forma JSON do relatório."""
        return {"method": self.method.value, "patterns": self.rows(), "bh": self.bh.to_dict()}


def multi_pattern_test(
    ts: TrialSet,
    delta: float = DEFAULT_DELTA,
    q: float = DEFAULT_Q,
    method: TestMethod | str = TestMethod.GAUE,
    max_neurons: int = MULTI_PATTERN_MAX_NEURONS,
    bin_width: float | None = None,
    match: ConstellationMatch | str = ConstellationMatch.EXACT,
) -> MultiPatternReport:
    """
    Testa todos os padrões 𝓛 ⊆ {1..n} com |𝓛| ≥ 2 (K = 2ⁿ − n − 1) e aplica
    Benjamini-Hochberg no nível q.

    Um padrão cujo teste é indefinido entra com p = 1 e a sinalização correspondente.
    """
    q = _check_level(q, "q")
    method = TestMethod(method)
    if ts.neuron_count < 2:
        raise ParameterError("São necessários ao menos 2 neurônios")
    if ts.neuron_count > max_neurons:
        raise CapacityError(
            f"{ts.neuron_count} neurônios excedem o limite de {max_neurons} do teste múltiplo"
        )

    outcomes = []
    for pattern in all_patterns(ts.neuron_count):
        try:
            if method is TestMethod.GAUE:
                outcome = gaue_test(ts, pattern, delta, q)
            else:
                outcome = ue_test(ts, pattern, bin_width, q, match, delta)
        except DegenerateStatisticError as e:
            logger.debug("Padrão %s indefinido: %s", pattern.label, e)
            outcome = degenerate_outcome(pattern, method, e)
        outcomes.append(outcome)

    bh = bh_procedure([(o.pattern.label, o.p_value) for o in outcomes], q)
    return MultiPatternReport(method=method, outcomes=tuple(outcomes), bh=bh)
