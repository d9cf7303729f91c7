"""Módulo com as fórmulas fechadas dos momentos da contagem de coincidências"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from .exceptions import CapacityError, ParameterError
from .spike_data import PatternSubset, Window
from .utils import (
    DEFAULT_MC_SAMPLES,
    MAX_SUBSET_SIZE,
    MIN_MC_SAMPLES,
    QUADRATURE_MAX_L,
    OracleMethod,
)

logger = logging.getLogger(__name__)

# Amostras de Monte-Carlo processadas por bloco
MC_CHUNK = 100_000


def _check_lk(L: int, k: int, k_max: int) -> None:  # pylint: disable=invalid-name
    if int(L) != L or int(k) != k:
        raise ParameterError(f"L e k devem ser inteiros (L={L}, k={k})")
    if L < 2:
        raise ParameterError(f"L deve ser ≥ 2, recebido {L}")
    if L > MAX_SUBSET_SIZE:
        raise CapacityError(f"L={L} excede o máximo suportado de {MAX_SUBSET_SIZE}")
    if not 0 <= k <= k_max:
        raise ParameterError(f"k={k} fora do intervalo 0..{k_max} para L={L}")


def _check_window(window: Window, delta: float) -> None:
    if not math.isfinite(delta) or delta <= 0:
        raise ParameterError(f"δ deve ser positivo, recebido {delta}")
    if delta >= window.length / 2:
        raise ParameterError(f"δ={delta} deve ser menor que (b − a)/2 = {window.length / 2}")


# ================================================================================================ #
#                                         f(L,k), h(L,k), I(L,k)                                   #
# ================================================================================================ #
def f_Lk(L: int, k: int) -> Fraction:  # pylint: disable=invalid-name
    """f(L,k) = (k(k+1) + L(L+1)) / (L − k + 1), em aritmética racional exata."""
    _check_lk(L, k, L - 1)
    return Fraction(k * (k + 1) + L * (L + 1), L - k + 1)


def h_Lk(L: int, k: int) -> Fraction:  # pylint: disable=invalid-name
    """
    h(L,k) = (−k³ + k²(2+L) + k(5+2L−L²) + L³ + 2L² − L − 2) / ((L−k+2)(L−k+1)),
    em aritmética racional exata.
    """
    _check_lk(L, k, L - 1)
    numerator = -(k**3) + k**2 * (2 + L) + k * (5 + 2 * L - L**2) + L**3 + 2 * L**2 - L - 2
    return Fraction(numerator, (L - k + 2) * (L - k + 1))


@lru_cache(maxsize=4096)
def _exact_I(L: int, k: int, a: float, b: float, delta: float) -> Fraction:  # noqa: N802
    # pylint: disable=invalid-name
    length = Fraction(b) - Fraction(a)
    d = Fraction(delta)
    if k < L:
        return f_Lk(L, k) * length * d ** (L + k - 1) - h_Lk(L, k) * d ** (L + k)
    return (
        L**2 * length**2 * d ** (2 * L - 2)
        - 2 * L * (L - 1) * length * d ** (2 * L - 1)
        + (L - 1) ** 2 * d ** (2 * L)
    )


def I_Lk(L: int, k: int, window: Window, delta: float) -> float:  # noqa: N802
    """
    Integral I(L,k) das fórmulas fechadas de média e variância.

    Para k < L usa f(L,k)(b−a)δ^{L+k−1} − h(L,k)δ^{L+k}; para k = L usa a forma quadrática
    em (b − a). Todo o cálculo é racional a partir dos floats de entrada e arredondado uma
    única vez, de modo que I(L,L) e I(L,0)² diferem apenas pelo arredondamento final.
    """
    # pylint: disable=invalid-name
    _check_lk(L, k, L)
    _check_window(window, delta)
    return float(_exact_I(int(L), int(k), window.a, window.b, float(delta)))


# Bits significativos mantidos em δ/(b − a)
RELATIVE_DELAY_BITS = 36


def relative_delay(window: Window, delta: float) -> float:
    """
    Razão δ/(b − a), calculada de forma racional e arredondada a RELATIVE_DELAY_BITS bits.

    Reescalar tempos, janela e δ por s > 0 preserva o valor retornado, exceto quando a razão
    cai a poucos ulps de uma fronteira do arredondamento.
    """
    _check_window(window, delta)
    exact = Fraction(float(delta)) / (Fraction(window.b) - Fraction(window.a))
    mantissa, exponent = math.frexp(float(exact))
    scaled = round(mantissa * 2**RELATIVE_DELAY_BITS)
    return math.ldexp(scaled, exponent - RELATIVE_DELAY_BITS)


# ================================================================================================ #
#                                          ORÁCULOS NUMÉRICOS                                      #
# ================================================================================================ #
@dataclass(frozen=True)
class OracleEstimate:
    """Estimativa numérica de I(L,k) com limite de erro (quadratura) ou erro padrão (MC)."""

    value: float
    error: float
    method: OracleMethod
    samples: int = 0

    def to_dict(self) -> dict:
        """Forma JSON da estimativa."""
        return {
            "value": self.value,
            "error": self.error,
            "method": self.method.value,
            "samples": self.samples,
        }


class _Quadrature:
    """
    Quadratura adaptativa aninhada da integral que define I(L,k).

    Dado um conjunto de pontos fixos P, a próxima coordenada só contribui dentro de
    [max P − δ, min P + δ] ∩ [a, b]; a última coordenada livre é integrada exatamente como o
    comprimento desse intervalo. O integrando é polinomial por partes com quebras em p ± jδ.
    """

    def __init__(self, a: float, b: float, delta: float) -> None:
        self.a = a
        self.b = b
        self.delta = delta
        self.error = 0.0

    def _range(self, fixed: tuple) -> tuple[float, float]:
        if not fixed:
            return self.a, self.b
        return max(self.a, max(fixed) - self.delta), min(self.b, min(fixed) + self.delta)

    def _breaks(self, fixed: tuple, free: int, lo: float, hi: float) -> list[float]:
        anchors = (*fixed, self.a, self.b)
        candidates = {p + j * self.delta for p in anchors for j in range(-free, free + 1)}
        return sorted(x for x in candidates if lo < x < hi)

    def _integrate(self, func, fixed: tuple, free: int, lo: float, hi: float) -> float:
        value, abserr = integrate.quad(
            func,
            lo,
            hi,
            points=self._breaks(fixed, free, lo, hi) or None,
            limit=200,
            epsabs=1e-15,
            epsrel=1e-11,
        )
        if not fixed:
            self.error += abserr
        return value

    def volume(self, fixed: tuple, free: int) -> float:
        """Volume de {x ∈ [a,b]^free : span(P ∪ x) ≤ δ}."""
        if fixed and max(fixed) - min(fixed) > self.delta:
            return 0.0
        if free == 0:
            return 1.0
        lo, hi = self._range(fixed)
        if hi <= lo:
            return 0.0
        if free == 1:
            return hi - lo
        return self._integrate(lambda u: self.volume((*fixed, u), free - 1), fixed, free, lo, hi)

    def outer(self, fixed: tuple, free: int, inner: int) -> float:
        """Integral sobre `free` coordenadas externas do quadrado do volume interno."""
        if free == 0:
            return self.volume(fixed, inner) ** 2
        if fixed and max(fixed) - min(fixed) > self.delta:
            return 0.0
        lo, hi = self._range(fixed)
        if hi <= lo:
            return 0.0
        return self._integrate(
            lambda u: self.outer((*fixed, u), free - 1, inner), fixed, free + inner, lo, hi
        )


def _oracle_quadrature(L: int, k: int, window: Window, delta: float) -> OracleEstimate:
    # pylint: disable=invalid-name
    quad = _Quadrature(window.a, window.b, delta)
    if k == 0:
        value = quad.volume((), L)
    elif k == L:
        volume = quad.volume((), L)
        value = volume**2
        quad.error *= 2 * volume
    else:
        value = quad.outer((), L - k, k)
    return OracleEstimate(value, quad.error, OracleMethod.QUADRATURE)


def _draw_cluster(
    rng: np.random.Generator, n: int, count: int, anchor: np.ndarray, a: float, b: float,
    delta: float,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Sorteia `count` coordenadas que só contribuem perto dos pontos de `anchor`.

    Retorna (pontos, pesos) com E[peso · g(pontos)] = ∫_{[a,b]^count} g para toda g que se
    anula quando o span excede δ. Sem âncora, a primeira coordenada é uniforme em [a, b].
    """
    weight = np.ones(n)
    drawn = []
    if anchor.shape[1] == 0:
        if count == 0:
            return np.empty((n, 0)), weight
        first = rng.uniform(a, b, size=(n, 1))
        weight *= b - a
        drawn.append(first)
        anchor = first
        count -= 1

    lo = np.maximum(a, anchor.max(axis=1) - delta)
    hi = np.minimum(b, anchor.min(axis=1) + delta)
    length = np.clip(hi - lo, 0.0, None)
    drawn.append(lo[:, None] + length[:, None] * rng.random((n, count)))
    weight *= length**count
    return np.hstack(drawn), weight


def _span_ok(points: np.ndarray, delta: float) -> np.ndarray:
    if points.shape[1] == 0:
        return np.ones(points.shape[0], dtype=bool)
    return (points.max(axis=1) - points.min(axis=1)) <= delta


def _oracle_monte_carlo(
    L: int, k: int, window: Window, delta: float, samples: int, rng: np.random.Generator
) -> OracleEstimate:
    """
    Estimador aninhado não viesado: o quadrado da integral interna é o produto de duas
    estimativas internas independentes.
    """
    # pylint: disable=invalid-name
    a, b = window.a, window.b
    total = total_sq = 0.0
    done = 0
    while done < samples:
        n = min(MC_CHUNK, samples - done)
        outer, weight = _draw_cluster(rng, n, L - k, np.empty((n, 0)), a, b, delta)
        if k == 0:
            z = weight * _span_ok(outer, delta)
        else:
            z = weight
            for _ in range(2):
                inner, inner_weight = _draw_cluster(rng, n, k, outer, a, b, delta)
                z = z * inner_weight * _span_ok(np.hstack([outer, inner]), delta)
        total += float(z.sum())
        total_sq += float(np.square(z).sum())
        done += n

    mean = total / samples
    variance = max(total_sq / samples - mean**2, 0.0) * samples / (samples - 1)
    return OracleEstimate(mean, math.sqrt(variance / samples), OracleMethod.MONTE_CARLO, samples)


def I_Lk_oracle(  # noqa: N802
    L: int,  # pylint: disable=invalid-name
    k: int,
    window: Window,
    delta: float,
    method: OracleMethod | str = OracleMethod.QUADRATURE,
    samples: int = DEFAULT_MC_SAMPLES,
    rng: np.random.Generator | None = None,
) -> OracleEstimate:
    """
    Avaliação numérica independente da integral que define I(L,k), sem usar f nem h.

    Parâmetros:
    L, k (int): Dimensões da integral (0 ≤ k ≤ L).
    window (Window): Janela [a, b].
    delta (float): Atraso δ.
    method (OracleMethod): Quadratura aninhada (L ≤ 4) ou Monte-Carlo (qualquer L).
    samples (int): Número de amostras do Monte-Carlo (≥ 10³).
    rng (Generator): Gerador usado pelo Monte-Carlo.

    Retorna:
    OracleEstimate: Valor e limite de erro (quadratura) ou erro padrão (Monte-Carlo).
    """
    _check_lk(L, k, L)
    _check_window(window, delta)
    method = OracleMethod(method)

    if method is OracleMethod.QUADRATURE:
        if L > QUADRATURE_MAX_L:
            raise CapacityError(
                f"Quadratura aninhada limitada a L ≤ {QUADRATURE_MAX_L}, recebido L={L}"
            )
        return _oracle_quadrature(int(L), int(k), window, float(delta))

    if samples < MIN_MC_SAMPLES:
        raise ParameterError(f"Monte-Carlo exige ao menos {MIN_MC_SAMPLES} amostras")
    rng = rng if rng is not None else np.random.default_rng()
    logger.debug("Oráculo MC de I(%d,%d) com %d amostras", L, k, samples)
    return _oracle_monte_carlo(int(L), int(k), window, float(delta), int(samples), rng)


# ================================================================================================ #
#                                         MOMENTOS TEÓRICOS                                        #
# ================================================================================================ #
@dataclass(frozen=True)
class IntensityVector:
    """Intensidades λ_l (Hz) dos neurônios `neurons` (numeração a partir de 1)."""

    neurons: tuple[int, ...]
    rates: np.ndarray = field(compare=False)

    def __post_init__(self) -> None:
        rates = np.array(self.rates, dtype=np.float64).reshape(-1)
        if rates.size != len(self.neurons):
            raise ParameterError(
                f"{rates.size} intensidades para {len(self.neurons)} neurônios"
            )
        if np.any(rates < 0) or not np.all(np.isfinite(rates)):
            raise ParameterError(f"Intensidades devem ser finitas e ≥ 0: {rates.tolist()}")
        rates.setflags(write=False)
        object.__setattr__(self, "neurons", tuple(int(i) for i in self.neurons))
        object.__setattr__(self, "rates", rates)

    @classmethod
    def uniform(cls, rate: float, neurons: Sequence[int]) -> "IntensityVector":
        """Mesma intensidade para todos os neurônios."""
        return cls(tuple(neurons), np.full(len(neurons), float(rate)))

    def for_subset(self, subset: PatternSubset) -> np.ndarray:
        """Intensidades dos neurônios do padrão, na ordem do padrão."""
        lookup = dict(zip(self.neurons, self.rates))
        missing = [i for i in subset.indices if i not in lookup]
        if missing:
            raise ParameterError(f"Sem intensidade para os neurônios {missing}")
        return np.array([lookup[i] for i in subset.indices])

    def to_dict(self) -> dict:
        """Forma JSON: {neurônio: λ}."""
        return {str(i): float(r) for i, r in zip(self.neurons, self.rates)}


@dataclass(frozen=True)
class MomentReport:
    """Esperança m₀ e variância de X_𝓛 sob independência, com os termos indexados por k."""

    m0: float
    variance: float
    per_k_terms: tuple[float, ...]

    def to_dict(self) -> dict:
        """Forma JSON do relatório."""
        return {"m0": self.m0, "variance": self.variance, "per_k_terms": list(self.per_k_terms)}


def subset_sum(rates: np.ndarray, k: int) -> float:
    """Σ_{𝓙 ⊂ 𝓛, #𝓙 = k} ∏_{j∈𝓙} λ_j² ∏_{l∉𝓙} λ_l."""
    size = len(rates)
    if size > MAX_SUBSET_SIZE:
        raise CapacityError(f"L={size} excede o máximo suportado de {MAX_SUBSET_SIZE}")
    base = math.prod(float(r) for r in rates)
    return sum(
        base * math.prod(float(rates[j]) for j in combo)
        for combo in itertools.combinations(range(size), k)
    )


def theoretical_moments(
    lambdas: IntensityVector | Sequence[float],
    subset: PatternSubset,
    window: Window,
    delta: float,
) -> MomentReport:
    """
    m₀ = (∏ λ_l) I(L,0) e Var(X_𝓛) = m₀ + Σ_{k=1}^{L−1} (subset_sum_k) I(L,k) para processos
    de Poisson homogêneos independentes.
    """
    rates = (
        lambdas.for_subset(subset)
        if isinstance(lambdas, IntensityVector)
        else np.asarray(lambdas, dtype=np.float64)
    )
    L = subset.size  # pylint: disable=invalid-name
    if rates.size != L:
        raise ParameterError(f"{rates.size} intensidades para um padrão de tamanho {L}")
    _check_window(window, delta)

    m0 = math.prod(float(r) for r in rates) * I_Lk(L, 0, window, delta)
    terms = tuple(subset_sum(rates, k) * I_Lk(L, k, window, delta) for k in range(1, L))
    return MomentReport(m0=m0, variance=m0 + sum(terms), per_k_terms=terms)


def delta_method_variance(
    lambdas: IntensityVector | Sequence[float],
    subset: PatternSubset,
    window: Window,
    delta: float,
) -> float:
    """σ² = Var(X_𝓛) − (b−a)⁻¹ I(L,L) ∏ λ_l² Σ λ_l⁻¹, variância limite do método delta."""
    rates = (
        lambdas.for_subset(subset)
        if isinstance(lambdas, IntensityVector)
        else np.asarray(lambdas, dtype=np.float64)
    )
    if np.any(rates <= 0):
        raise ParameterError("σ² exige todas as intensidades positivas")
    report = theoretical_moments(rates, subset, window, delta)
    L = subset.size  # pylint: disable=invalid-name
    correction = (
        I_Lk(L, L, window, delta)
        * math.prod(float(r) ** 2 for r in rates)
        * float(np.sum(1.0 / rates))
        / window.length
    )
    return report.variance - correction
