"""Módulo de avaliação por Monte-Carlo: procedimento P, distâncias KS, scans e histogramas"""

import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Callable, Sequence

import dask
import numpy as np
import pandas as pd
from dask import delayed
from scipy import stats

from . import __version__
from .exceptions import CoincideError, DegenerateStatisticError, ExplosionError, ParameterError
from .independence_tests import gaue_test, multi_pattern_test, ue_test
from .simulate import FrameworkConfig, sample_framework
from .spike_data import PatternSubset, all_patterns
from .utils import (
    DEFAULT_ALPHA,
    DEFAULT_BATCH_SIZE,
    DEFAULT_DELTA,
    DEFAULT_DURATION_GRID,
    DEFAULT_LAMBDA_GRID,
    DEFAULT_M_GRID,
    DEFAULT_Q,
    DEFAULT_REPETITIONS,
    DEFAULT_SORTED_M,
    NEURON_COUNT,
    ConstellationMatch,
    CurveKind,
    DependenceSign,
    Reference,
    TestMethod,
)

logger = logging.getLogger(__name__)


# ================================================================================================ #
#                                           DISTÂNCIA KS                                           #
# ================================================================================================ #
def reference_cdf(reference: Reference | str) -> Callable[[np.ndarray], np.ndarray]:
    """CDF de referência: normal padrão ou uniforme em [0, 1]."""
    if Reference(reference) is Reference.STD_NORMAL:
        return stats.norm.cdf
    return stats.uniform.cdf


def ks_distance(
    sample: Sequence[float], reference: Reference | str = Reference.STD_NORMAL
) -> float:
    """
    Distância de Kolmogorov-Smirnov sup_x |F̂(x) − F(x)|, avaliada exatamente nos saltos da
    CDF empírica: max_i max(i/n − F(x₍ᵢ₎), F(x₍ᵢ₎) − (i−1)/n).
    """
    values = np.sort(np.asarray(sample, dtype=np.float64))
    if values.size == 0:
        raise ParameterError("Distância KS exige uma amostra não vazia")
    if np.any(np.isnan(values)):
        raise ParameterError("Amostra com NaN")
    n = values.size
    cdf = reference_cdf(reference)(values)
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - cdf, cdf - (i - 1) / n)))


# ================================================================================================ #
#                                              CURVAS                                              #
# ================================================================================================ #
@dataclass(frozen=True)
class CurveData:
    """Curva emitida pelo harness: pontos (x, y), tipo e identificador."""

    kind: CurveKind
    curve_id: str
    x: tuple
    y: tuple[float, ...]
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CurveKind(self.kind))
        object.__setattr__(self, "x", tuple(self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ParameterError(f"Curva {self.curve_id}: x e y com tamanhos diferentes")

    def to_dict(self) -> dict:
        """Forma JSON da curva."""
        return {
            "kind": self.kind.value,
            "curve_id": self.curve_id,
            "label": self.label,
            "x": list(self.x),
            "y": list(self.y),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "CurveData":
        """Inverso de to_dict."""
        return cls(
            kind=CurveKind(payload["kind"]),
            curve_id=payload["curve_id"],
            x=tuple(payload["x"]),
            y=tuple(payload["y"]),
            label=payload.get("label", ""),
        )

    def to_frame(self) -> pd.DataFrame:
        """DataFrame com as colunas x, y."""
        return pd.DataFrame({"x": list(self.x), "y": list(self.y)})


def sorted_pvalue_curve(pvalues: Sequence[float], curve_id: str, label: str = "") -> CurveData:
    """Função quantil empírica dos p-valores: x = i/n, y = p₍ᵢ₎."""
    values = np.sort(np.asarray(pvalues, dtype=np.float64))
    n = values.size
    x = tuple(float(i / n) for i in range(1, n + 1))
    return CurveData(CurveKind.SORTED_PVALUES, curve_id, x, tuple(values), label)


def diagonal_deviation(curve: CurveData) -> float:
    """Maior afastamento entre a curva de p-valores ordenados e a diagonal (distância KS)."""
    if not curve.x:
        raise ParameterError("Curva vazia")
    x = np.asarray(curve.x, dtype=np.float64)
    y = np.asarray(curve.y, dtype=np.float64)
    step = 1.0 / x.size
    return float(np.max(np.maximum(x - y, y - (x - step))))


# ================================================================================================ #
#                                       PROCEDIMENTO P                                             #
# ================================================================================================ #
@dataclass(frozen=True)
class EvalRun:
    """Configuração de uma avaliação por Monte-Carlo."""

    cfg: FrameworkConfig
    repetitions: int = DEFAULT_REPETITIONS
    m_grid: tuple[int, ...] = DEFAULT_M_GRID
    methods: tuple[TestMethod, ...] = (TestMethod.GAUE, TestMethod.UE)
    alphas: tuple[float, ...] = (DEFAULT_ALPHA,)
    sorted_m: int = DEFAULT_SORTED_M
    delta: float = DEFAULT_DELTA
    bin_width: float | None = None
    match: ConstellationMatch = ConstellationMatch.EXACT
    pattern: tuple[int, ...] = tuple(range(1, NEURON_COUNT + 1))
    batch_size: int = DEFAULT_BATCH_SIZE
    threads: int = 1
    scheduler: str = "processes"

    def __post_init__(self) -> None:
        object.__setattr__(self, "m_grid", tuple(int(m) for m in self.m_grid))
        object.__setattr__(self, "methods", tuple(TestMethod(m) for m in self.methods))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "match", ConstellationMatch(self.match))
        if self.repetitions < 1:
            raise ParameterError(f"Número de repetições deve ser ≥ 1: {self.repetitions}")
        if not self.m_grid or list(self.m_grid) != sorted(set(self.m_grid)):
            raise ParameterError(f"Grade de M deve ser não vazia e crescente: {self.m_grid}")
        if self.m_grid[0] < 2:
            raise ParameterError("A grade de M começa em 2 trials")
        if not self.methods:
            raise ParameterError("Nenhum método selecionado")
        if any(not 0 < a < 1 for a in self.alphas) or not self.alphas:
            raise ParameterError(f"Níveis α inválidos: {self.alphas}")
        if self.batch_size < 1 or self.threads < 1:
            raise ParameterError("batch_size e threads devem ser ≥ 1")
        PatternSubset(self.pattern)

    @property
    def sorted_at(self) -> int:
        """M da curva de p-valores ordenados (o maior da grade se sorted_m não estiver nela)."""
        return self.sorted_m if self.sorted_m in self.m_grid else self.m_grid[-1]

    def replace(self, **changes) -> "EvalRun":
        """Cópia com campos alterados."""
        values = {f: getattr(self, f) for f in self.__dataclass_fields__}
        values.update(changes)
        return EvalRun(**values)

    def to_dict(self) -> dict:
        """Forma JSON da configuração."""
        return {
            "cfg": self.cfg.to_dict(),
            "repetitions": self.repetitions,
            "m_grid": list(self.m_grid),
            "methods": [m.value for m in self.methods],
            "alphas": list(self.alphas),
            "sorted_m": self.sorted_at,
            "delta": self.delta,
            "bin_width": self.bin_width,
            "match": self.match.value,
            "pattern": list(self.pattern),
            "batch_size": self.batch_size,
        }


@dataclass(frozen=True)
class RepetitionRecord:
    """Resultado de um teste em uma repetição, para um método e um M."""

    statistic: float
    p_value: float
    rejects: tuple[bool, ...]
    sign: DependenceSign = DependenceSign.NONE
    failed: bool = False


def _failed_record(alphas: Sequence[float]) -> RepetitionRecord:
    return RepetitionRecord(math.nan, math.nan, (False,) * len(alphas), failed=True)


def _run_test(run: EvalRun, ts, pattern: PatternSubset, method: TestMethod) -> RepetitionRecord:
    if method is TestMethod.GAUE:
        outcome = gaue_test(ts, pattern, run.delta, run.alphas[0])
        rejects = tuple(outcome.p_value <= alpha for alpha in run.alphas)
    else:
        outcomes = [
            ue_test(ts, pattern, run.bin_width, alpha, run.match, run.delta)
            for alpha in run.alphas
        ]
        outcome = outcomes[0]
        rejects = tuple(o.reject for o in outcomes)
    return RepetitionRecord(outcome.statistic, outcome.p_value, rejects, outcome.sign)


def evaluate_repetition(run: EvalRun, repetition: int) -> dict:
    """
    Uma repetição do procedimento P: parâmetros novos, max(M) trials e os testes sobre os
    prefixos de cada M da grade.

    Retorna:
    dict: {(método, M): RepetitionRecord}
    """
    pattern = PatternSubset(run.pattern)
    try:
        ts, _ = sample_framework(run.cfg, repetition, trials=run.m_grid[-1])
    except ExplosionError as e:
        logger.warning("Repetição %d descartada: %s", repetition, e)
        return {(m, M): _failed_record(run.alphas) for m in run.methods for M in run.m_grid}

    records = {}
    for M in run.m_grid:  # pylint: disable=invalid-name
        prefix = ts.head(M)
        for method in run.methods:
            try:
                records[(method, M)] = _run_test(run, prefix, pattern, method)
            except DegenerateStatisticError as e:
                logger.warning(
                    "Repetição %d, %s, M=%d: %s", repetition, method.value, M, e
                )
                records[(method, M)] = _failed_record(run.alphas)
    return records


@dataclass
class EvalReport:
    """Curvas e contabilidade de uma avaliação."""

    run: EvalRun
    curves: list[CurveData] = field(default_factory=list)
    completed: int = 0
    failures: dict = field(default_factory=dict)
    excitatory_share: dict = field(default_factory=dict)

    def curve(self, curve_id: str) -> CurveData:
        """Retorna a curva pelo identificador."""
        for curve in self.curves:
            if curve.curve_id == curve_id:
                return curve
        raise KeyError(curve_id)

    def meta(self) -> dict:
        """Metadados JSON: configuração, sementes, falhas e versão."""
        return {
            "version": __version__,
            "run": self.run.to_dict(),
            "seed": self.run.cfg.seed,
            "completed_repetitions": self.completed,
            "failures": {f"{m.value}@M={M}": n for (m, M), n in sorted_items(self.failures)},
            "excitatory_share": {
                f"{m.value}@M={M}": s for (m, M), s in sorted_items(self.excitatory_share)
            },
            "curves": [{"curve_id": c.curve_id, "kind": c.kind.value} for c in self.curves],
        }


def sorted_items(mapping: dict) -> list:
    """Itens de um dicionário {(método, M): valor} em ordem estável."""
    return sorted(mapping.items(), key=lambda item: (item[0][0].value, item[0][1]))


def curve_id_for(kind: CurveKind, *parts) -> str:
    """Identificador de curva, ex.: ks_vs_M-pvalues-gaue."""
    return "-".join([kind.value, *(str(p) for p in parts)])


def aggregate(run: EvalRun, results: Sequence[dict]) -> EvalReport:
    """
    Agrega as repetições: KS das estatísticas e dos p-valores por M, taxa de rejeição por α e
    p-valores ordenados. Repetições com falha saem do KS mas contam como não rejeição.
    """
    report = EvalReport(run=run, completed=len(results))
    if not results:
        return report

    for method in run.methods:
        ks_stat, ks_pval = [], []
        rates = {alpha: [] for alpha in run.alphas}
        for M in run.m_grid:  # pylint: disable=invalid-name
            records = [r[(method, M)] for r in results]
            valid = [rec for rec in records if not rec.failed]
            report.failures[(method, M)] = len(records) - len(valid)

            statistics = [rec.statistic for rec in valid if math.isfinite(rec.statistic)]
            pvalues = [rec.p_value for rec in valid]
            ks_stat.append(
                ks_distance(statistics, Reference.STD_NORMAL) if statistics else math.nan
            )
            ks_pval.append(ks_distance(pvalues, Reference.UNIFORM01) if pvalues else math.nan)

            for position, alpha in enumerate(run.alphas):
                rejected = sum(rec.rejects[position] for rec in records)
                rates[alpha].append(rejected / len(records))

            signs = [rec.sign for rec in valid if rec.rejects[0]]
            if signs:
                excitatory = sum(s is DependenceSign.EXCITATORY for s in signs)
                report.excitatory_share[(method, M)] = excitatory / len(signs)

            if M == run.sorted_at and pvalues:
                report.curves.append(
                    sorted_pvalue_curve(
                        pvalues,
                        curve_id_for(CurveKind.SORTED_PVALUES, method.value, f"M{M}"),
                        f"{method.value} p-valores ordenados, M={M}",
                    )
                )

        grid = tuple(float(M) for M in run.m_grid)
        report.curves.append(
            CurveData(
                CurveKind.KS_VS_M,
                curve_id_for(CurveKind.KS_VS_M, "statistics", method.value),
                grid,
                tuple(ks_stat),
                f"KS(estatísticas, N(0,1)) {method.value}",
            )
        )
        report.curves.append(
            CurveData(
                CurveKind.KS_VS_M,
                curve_id_for(CurveKind.KS_VS_M, "pvalues", method.value),
                grid,
                tuple(ks_pval),
                f"KS(p-valores, U[0,1]) {method.value}",
            )
        )
        for alpha in run.alphas:
            report.curves.append(
                CurveData(
                    CurveKind.RATE_VS_M,
                    curve_id_for(CurveKind.RATE_VS_M, method.value, f"alpha{alpha:g}"),
                    grid,
                    tuple(rates[alpha]),
                    f"taxa de rejeição {method.value}, α={alpha:g}",
                )
            )
    return report


def _compute(tasks: list, threads: int, scheduler: str) -> list:
    """Executa as tarefas do dask; com um único worker usa o scheduler síncrono."""
    if threads <= 1:
        return list(dask.compute(*tasks, scheduler="synchronous"))
    return list(dask.compute(*tasks, scheduler=scheduler, num_workers=threads))


def run_procedure_P(  # pylint: disable=invalid-name
    run: EvalRun, on_batch: Callable[[EvalReport], None] | None = None
) -> EvalReport:
    """
    Executa o procedimento P: R repetições em lotes, cada uma com parâmetros novos.

    Parâmetros:
    run (EvalRun): Configuração da avaliação.
    on_batch (Callable | None): Chamado com o relatório parcial ao fim de cada lote.

    Retorna:
    EvalReport: Curvas e contabilidade finais.
    """
    results: list[dict] = []
    report = EvalReport(run=run)
    for start in range(0, run.repetitions, run.batch_size):
        stop = min(start + run.batch_size, run.repetitions)
        tasks = [delayed(evaluate_repetition)(run, r) for r in range(start, stop)]
        results.extend(_compute(tasks, run.threads, run.scheduler))
        report = aggregate(run, results)
        logger.info(
            "%s: %d/%d repetições concluídas", run.cfg.framework.value, stop, run.repetitions
        )
        if on_batch is not None:
            on_batch(report)
    return report


def parameter_scan(
    base: EvalRun,
    lambda_grid: Sequence[float] = DEFAULT_LAMBDA_GRID,
    duration_grid: Sequence[float] = DEFAULT_DURATION_GRID,
    on_cell: Callable[[float, float, EvalReport], None] | None = None,
    on_batch: Callable[[float, float, EvalReport], None] | None = None,
) -> dict[tuple[float, float], EvalReport]:
    """
    Fixa (λ, b − a) em cada célula da grade e executa o procedimento P.

    `on_batch` recebe (λ, duração, relatório parcial) ao fim de cada lote; `on_cell`, o
    relatório final da célula.

    Retorna:
    dict: {(λ, duração): EvalReport}
    """
    if not lambda_grid or not duration_grid:
        raise ParameterError("As grades de λ e de duração devem ser não vazias")

    cells = {}
    for rate in lambda_grid:
        for duration in duration_grid:
            cfg = base.cfg.replace(
                rate=float(rate), duration=float(duration), allow_out_of_range=True
            )
            logger.info("Célula λ=%g Hz, b−a=%g s", rate, duration)
            flush = None
            if on_batch is not None:
                flush = partial(on_batch, float(rate), float(duration))
            report = run_procedure_P(base.replace(cfg=cfg), on_batch=flush)
            cells[(float(rate), float(duration))] = report
            if on_cell is not None:
                on_cell(float(rate), float(duration), report)
    return cells


def scan_cell_name(rate: float, duration: float) -> str:
    """Nome do diretório de uma célula do scan."""
    return f"lambda{rate:g}_T{duration:g}"


# ================================================================================================ #
#                                    HISTOGRAMA DE DETECÇÕES                                       #
# ================================================================================================ #
@dataclass
class DetectionReport:
    """Frequência de rejeição de cada padrão por método (procedimento BH)."""

    cfg: FrameworkConfig
    q: float
    repetitions: int
    frequencies: dict = field(default_factory=dict)
    flagged: dict = field(default_factory=dict)
    curves: list[CurveData] = field(default_factory=list)

    def meta(self) -> dict:
        """Metadados JSON."""
        return {
            "version": __version__,
            "cfg": self.cfg.to_dict(),
            "seed": self.cfg.seed,
            "q": self.q,
            "repetitions": self.repetitions,
            "frequencies": {m.value: f for m, f in self.frequencies.items()},
            "flagged": {m.value: f for m, f in self.flagged.items()},
            "curves": [{"curve_id": c.curve_id, "kind": c.kind.value} for c in self.curves],
        }


def detection_repetition(
    cfg: FrameworkConfig,
    repetition: int,
    q: float,
    methods: Sequence[TestMethod],
    delta: float,
) -> dict:
    """Teste múltiplo de uma repetição: {método: (rejeitados, sinalizados)}."""
    try:
        ts, _ = sample_framework(cfg, repetition)
    except ExplosionError as e:
        logger.warning("Repetição %d descartada: %s", repetition, e)
        return {method: (frozenset(), frozenset()) for method in methods}

    result = {}
    for method in methods:
        try:
            report = multi_pattern_test(ts, delta, q, method)
        except CoincideError as e:
            logger.warning("Repetição %d, %s: %s", repetition, method.value, e)
            result[method] = (frozenset(), frozenset())
            continue
        flagged = frozenset(o.pattern.label for o in report.outcomes if o.flags)
        result[method] = (report.bh.rejected, flagged)
    return result


def detection_histogram(
    cfg: FrameworkConfig,
    M: int = 50,  # pylint: disable=invalid-name
    q: float = DEFAULT_Q,
    repetitions: int = DEFAULT_REPETITIONS,
    methods: Sequence[TestMethod | str] = (TestMethod.GAUE, TestMethod.UE),
    delta: float = DEFAULT_DELTA,
    threads: int = 1,
    scheduler: str = "processes",
    batch_size: int = DEFAULT_BATCH_SIZE,
) -> DetectionReport:
    """
    Frequência com que cada padrão é rejeitado pelo teste múltiplo (BH no nível q) ao longo
    das repetições, para cada método.
    """
    if repetitions < 1:
        raise ParameterError(f"Número de repetições deve ser ≥ 1: {repetitions}")
    methods = tuple(TestMethod(m) for m in methods)
    cfg = cfg.replace(M=M)

    results: list[dict] = []
    for start in range(0, repetitions, batch_size):
        stop = min(start + batch_size, repetitions)
        tasks = [
            delayed(detection_repetition)(cfg, r, q, methods, delta) for r in range(start, stop)
        ]
        results.extend(_compute(tasks, threads, scheduler))
        logger.info("Histograma %s: %d/%d repetições", cfg.framework.value, stop, repetitions)

    labels = [p.label for p in all_patterns(NEURON_COUNT)]
    report = DetectionReport(cfg=cfg, q=q, repetitions=repetitions)
    for method in methods:
        rejected = {label: 0 for label in labels}
        flagged = {label: 0 for label in labels}
        for result in results:
            hits, flags = result[method]
            for label in hits:
                rejected[label] += 1
            for label in flags:
                flagged[label] += 1
        report.frequencies[method] = {label: rejected[label] / repetitions for label in labels}
        report.flagged[method] = flagged
        report.curves.append(
            CurveData(
                CurveKind.DETECTION_HISTOGRAM,
                curve_id_for(CurveKind.DETECTION_HISTOGRAM, method.value, f"M{M}"),
                tuple(labels),
                tuple(report.frequencies[method][label] for label in labels),
                f"frequência de detecção {method.value}, M={M}, q={q:g}",
            )
        )
    return report


# ================================================================================================ #
#                                         ESCRITA DAS CURVAS                                       #
# ================================================================================================ #
def _atomic_write(path: Path, text: str) -> None:
    """Escreve em um arquivo temporário no mesmo diretório e renomeia."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


# Rótulos das curvas, por curve_id, no diretório do experimento
LABELS_FILE = "labels.json"


def _read_labels(directory: Path) -> dict:
    path = directory / LABELS_FILE
    if not path.exists():
        return {}
    return json.loads(path.read_text(encoding="utf-8"))


def write_curves(
    curves: Sequence[CurveData],
    out_dir: str | os.PathLike,
    experiment: str,
    meta: dict | None = None,
) -> Path:
    """
    Escreve `curves/<experimento>/<curve-id>.csv` (cabeçalho x,y), `meta.json` e os rótulos
    em `labels.json`, mesclados com os já existentes no diretório.

    Retorna:
    Path: O diretório do experimento.
    """
    target = Path(out_dir) / "curves" / experiment
    for curve in curves:
        _atomic_write(target / f"{curve.curve_id}.csv", curve.to_frame().to_csv(index=False))
    labels = _read_labels(target)
    labels.update({curve.curve_id: curve.label for curve in curves if curve.label})
    if labels:
        text = json.dumps(labels, indent=2, sort_keys=True, ensure_ascii=False)
        _atomic_write(target / LABELS_FILE, text)
    if meta is not None:
        text = json.dumps(meta, indent=2, sort_keys=True, default=str)
        _atomic_write(target / "meta.json", text)
    logger.debug("%d curvas escritas em %s", len(curves), target)
    return target


def read_curve(path: str | os.PathLike) -> CurveData:
    """Lê uma curva escrita por write_curves; o tipo vem do prefixo do identificador."""
    path = Path(path)
    curve_id = path.stem
    kind = next((k for k in CurveKind if curve_id.startswith(k.value)), None)
    if kind is None:
        raise ParameterError(f"Identificador de curva desconhecido: {curve_id}")

    dtype = {"x": str} if kind is CurveKind.DETECTION_HISTOGRAM else {"x": np.float64}
    df = pd.read_csv(path, dtype={**dtype, "y": np.float64}, float_precision="round_trip")
    x = tuple(df.x.tolist())
    label = _read_labels(path.parent).get(curve_id, "")
    return CurveData(kind, curve_id, x, tuple(df.y.tolist()), label)


def report_to_dict(report: EvalReport) -> dict:
    """Forma JSON completa de um relatório (metadados e curvas)."""
    return {**report.meta(), "curves": [c.to_dict() for c in report.curves]}
