"""Módulo com os tipos de dados de spikes e a leitura/escrita de arquivos de trials"""

import itertools
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .exceptions import ParameterError, SpikeDataError
from .utils import FileFormat, ViolationKind

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["trial_id", "neuron_id", "spike_time"]
HEADER_PATTERN = re.compile(r"(\w+)\s*=\s*([^\s]+)")

# Tolerância relativa na comparação de comprimentos de janela
WINDOW_LENGTH_RTOL = 1e-12


# ================================================================================================ #
#                                         TIPOS DE DOMÍNIO                                         #
# ================================================================================================ #
@dataclass(frozen=True)
class Window:
    """Janela de observação [a, b] em segundos."""

    a: float
    b: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ParameterError(f"Janela com extremos não finitos: [{self.a}, {self.b}]")
        if self.b <= self.a:
            raise ParameterError(f"Janela inválida: b={self.b} deve ser maior que a={self.a}")

    @property
    def length(self) -> float:
        """Comprimento b − a da janela."""
        return self.b - self.a

    def rebased(self) -> "Window":
        """Retorna a janela equivalente ancorada em zero."""
        return Window(0.0, self.length)

    def shifted(self, offset: float) -> "Window":
        """Retorna a janela deslocada de offset segundos."""
        return Window(self.a + offset, self.b + offset)


@dataclass(frozen=True)
class SpikeTrain:
    """
    Tempos de disparo de um neurônio, em segundos.

    O array é copiado na construção e marcado como somente leitura. A ordenação não é imposta
    aqui: trens inválidos podem existir e são reportados por `validate`.
    """

    times: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return int(self.times.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return np.array_equal(self.times, other.times)

    def __hash__(self) -> int:
        return hash(self.times.tobytes())

    def shifted(self, offset: float) -> "SpikeTrain":
        """Retorna o trem com todos os tempos deslocados de offset."""
        return SpikeTrain(self.times + offset)


@dataclass(frozen=True)
class Trial:
    """Um trial: n trens de spikes (neurônios 1..n) sobre a mesma janela."""

    trains: tuple[SpikeTrain, ...]
    window: Window

    def __post_init__(self) -> None:
        trains = tuple(t if isinstance(t, SpikeTrain) else SpikeTrain(t) for t in self.trains)
        object.__setattr__(self, "trains", trains)

    @property
    def neuron_count(self) -> int:
        """Número de neurônios do trial."""
        return len(self.trains)

    def train(self, neuron_id: int) -> SpikeTrain:
        """Retorna o trem do neurônio `neuron_id` (numeração a partir de 1)."""
        if not 1 <= neuron_id <= self.neuron_count:
            raise ParameterError(
                f"Neurônio {neuron_id} fora do intervalo 1..{self.neuron_count}"
            )
        return self.trains[neuron_id - 1]

    def spike_counts(self) -> np.ndarray:
        """Número de spikes por neurônio."""
        return np.array([len(t) for t in self.trains], dtype=np.int64)

    def shifted(self, offset: float) -> "Trial":
        """Desloca trens e janela de offset segundos."""
        return Trial(tuple(t.shifted(offset) for t in self.trains), self.window.shifted(offset))

    def rebased(self) -> "Trial":
        """Retorna o trial re-ancorado em [0, b − a]."""
        if self.window.a == 0.0:
            return self
        return Trial(
            tuple(SpikeTrain(t.times - self.window.a) for t in self.trains), self.window.rebased()
        )


@dataclass(frozen=True)
class TrialSet:
    """Conjunto de M trials independentes com n neurônios cada."""

    trials: tuple[Trial, ...]
    neuron_count: int | None = None

    def __post_init__(self) -> None:
        trials = tuple(self.trials)
        object.__setattr__(self, "trials", trials)
        if self.neuron_count is None:
            object.__setattr__(self, "neuron_count", trials[0].neuron_count if trials else 0)

    @property
    def M(self) -> int:  # pylint: disable=invalid-name
        """Número de trials."""
        return len(self.trials)

    @property
    def window(self) -> Window:
        """Janela do primeiro trial (todas têm o mesmo comprimento)."""
        if not self.trials:
            raise SpikeDataError("Conjunto de trials vazio")
        return self.trials[0].window

    @property
    def window_length(self) -> float:
        """Comprimento b − a comum a todos os trials."""
        return self.window.length

    def head(self, m: int) -> "TrialSet":
        """Retorna o TrialSet formado pelos m primeiros trials."""
        if not 1 <= m <= self.M:
            raise ParameterError(f"Prefixo de {m} trials inválido para M={self.M}")
        return TrialSet(self.trials[:m], self.neuron_count)

    def total_counts(self) -> np.ndarray:
        """Número total de spikes por neurônio, somado sobre os trials."""
        if not self.trials:
            return np.zeros(self.neuron_count, dtype=np.int64)
        return np.sum([trial.spike_counts() for trial in self.trials], axis=0)


@dataclass(frozen=True, order=True)
class PatternSubset:
    """Subconjunto 𝓛 ⊆ {1..n} de neurônios, com |𝓛| = L ≥ 2."""

    indices: tuple[int, ...]

    def __post_init__(self) -> None:
        indices = tuple(int(i) for i in self.indices)
        if len(set(indices)) != len(indices):
            raise ParameterError(f"Padrão com neurônios repetidos: {indices}")
        if len(indices) < 2:
            raise ParameterError(f"Um padrão precisa de ao menos 2 neurônios: {indices}")
        if min(indices) < 1:
            raise ParameterError(f"Índices de neurônio começam em 1: {indices}")
        object.__setattr__(self, "indices", tuple(sorted(indices)))

    @classmethod
    def parse(cls, text: str) -> "PatternSubset":
        """Lê um padrão no formato "1,3,4"."""
        try:
            indices = [int(part) for part in str(text).replace(" ", "").split(",") if part]
        except ValueError as e:
            raise ParameterError(f"Padrão inválido: {text!r}") from e
        return cls(tuple(indices))

    @property
    def size(self) -> int:
        """Cardinalidade L do padrão."""
        return len(self.indices)

    @property
    def label(self) -> str:
        """Rótulo do padrão, ex.: "1-2-4"."""
        return "-".join(str(i) for i in self.indices)

    def positions(self) -> list[int]:
        """Posições (base 0) dos neurônios do padrão."""
        return [i - 1 for i in self.indices]

    def check(self, neuron_count: int) -> None:
        """Verifica se todos os índices existem para n neurônios."""
        if max(self.indices) > neuron_count:
            raise ParameterError(
                f"Padrão {self.label} fora do intervalo de neurônios 1..{neuron_count}"
            )

    def __str__(self) -> str:
        return "{" + ",".join(str(i) for i in self.indices) + "}"


def all_patterns(neuron_count: int) -> list[PatternSubset]:
    """
    Todos os padrões de tamanho ≥ 2 sobre n neurônios, ordenados por tamanho e depois
    lexicograficamente. São 2ⁿ − n − 1 padrões.
    """
    return [
        PatternSubset(combo)
        for size in range(2, neuron_count + 1)
        for combo in itertools.combinations(range(1, neuron_count + 1), size)
    ]


@dataclass(frozen=True)
class Violation:
    """Violação de um invariante, com coordenadas trial/neurônio (base 1) quando existirem."""

    kind: ViolationKind
    message: str
    trial: int | None = None
    neuron: int | None = None

    def to_dict(self) -> dict:
        """Forma JSON da violação."""
        return {
            "kind": self.kind.value,
            "message": self.message,
            "trial": self.trial,
            "neuron": self.neuron,
        }


# ================================================================================================ #
#                                             VALIDAÇÃO                                            #
# ================================================================================================ #
def _train_violations(train: SpikeTrain, window: Window, trial: int, neuron: int) -> list:
    violations = []
    times = train.times
    where = f"trial {trial}, neurônio {neuron}"

    if not np.all(np.isfinite(times)):
        violations.append(
            Violation(ViolationKind.NOT_FINITE, f"{where}: tempo não finito", trial, neuron)
        )
        times = times[np.isfinite(times)]

    steps = np.diff(times)
    if np.any(steps < 0):
        violations.append(
            Violation(ViolationKind.NOT_SORTED, f"{where}: não ordenado", trial, neuron)
        )
    if np.any(steps == 0):
        duplicated = times[1:][steps == 0][0]
        violations.append(
            Violation(
                ViolationKind.DUPLICATE_TIME,
                f"{where}: tempo de spike duplicado {duplicated!r}",
                trial,
                neuron,
            )
        )

    outside = times[(times < window.a) | (times > window.b)]
    if outside.size:
        violations.append(
            Violation(
                ViolationKind.OUTSIDE_WINDOW,
                f"{where}: tempo {outside[0]!r} fora da janela [{window.a}, {window.b}]",
                trial,
                neuron,
            )
        )
    return violations


def validate(ts: TrialSet) -> list[Violation]:
    """
    Verifica todos os invariantes de um TrialSet.

    Parâmetros:
    ts (TrialSet): O conjunto de trials a verificar.

    Retorna:
    list[Violation]: Todas as violações encontradas; lista vazia quando o conjunto é válido.
    """
    violations: list[Violation] = []

    if ts.M == 0:
        violations.append(Violation(ViolationKind.EMPTY_TRIAL_SET, "conjunto sem trials"))
        return violations
    if ts.neuron_count < 1:
        violations.append(Violation(ViolationKind.NO_NEURONS, "conjunto sem neurônios"))

    reference_length = ts.trials[0].window.length
    for k, trial in enumerate(ts.trials, start=1):
        if trial.neuron_count != ts.neuron_count:
            violations.append(
                Violation(
                    ViolationKind.NEURON_COUNT,
                    f"trial {k}: {trial.neuron_count} neurônios, esperado {ts.neuron_count}",
                    trial=k,
                )
            )
        if not math.isclose(trial.window.length, reference_length, rel_tol=WINDOW_LENGTH_RTOL):
            violations.append(
                Violation(
                    ViolationKind.WINDOW_LENGTH,
                    f"trial {k}: comprimento de janela {trial.window.length} difere de "
                    f"{reference_length}",
                    trial=k,
                )
            )
        for neuron, train in enumerate(trial.trains, start=1):
            violations.extend(_train_violations(train, trial.window, k, neuron))

    return violations


def ensure_valid(ts: TrialSet, source: str = "TrialSet") -> TrialSet:
    """Levanta SpikeDataError com todas as violações se o conjunto for inválido."""
    violations = validate(ts)
    if violations:
        raise SpikeDataError(f"{source}: {violations[0].message}", violations)
    return ts


# ================================================================================================ #
#                                       FORMA DE DICIONÁRIO                                        #
# ================================================================================================ #
def _rebase_trials(trials: list[list], trial_windows: list, window: Window) -> tuple[Window, list]:
    """Re-ancora trials com janelas absolutas diferentes em [0, b − a]."""
    if len(trial_windows) != len(trials):
        raise SpikeDataError(
            f"trial_windows tem {len(trial_windows)} entradas para {len(trials)} trials"
        )
    windows = [Window(*bounds) for bounds in trial_windows]
    lengths = np.array([w.length for w in windows])
    if not np.allclose(lengths, lengths[0], rtol=WINDOW_LENGTH_RTOL, atol=0.0):
        raise SpikeDataError("Trials com comprimentos de janela diferentes não são suportados")
    if not math.isclose(window.length, lengths[0], rel_tol=WINDOW_LENGTH_RTOL):
        raise SpikeDataError(
            f"Comprimento de janela declarado {window.length} difere das janelas dos trials"
        )

    rebased = []
    for trains, w in zip(trials, windows):
        for neuron, times in enumerate(trains, start=1):
            times = np.asarray(times, dtype=np.float64)
            if times.size and (times.min() < w.a or times.max() > w.b):
                raise SpikeDataError(
                    f"Neurônio {neuron}: tempo fora da janela [{w.a}, {w.b}] do trial"
                )
        rebased.append([np.asarray(times, dtype=np.float64) - w.a for times in trains])
    return window.rebased(), rebased


def trial_set_from_dict(payload: dict, validate_data: bool = True) -> TrialSet:
    """
    Constrói um TrialSet a partir da forma JSON
    `{window: {a, b}, neuron_count, trials: [[[tempos neurônio 1], ...], ...]}`.

    O campo opcional `trial_windows` (lista de [a_k, b_k]) re-ancora cada trial em [0, b − a].
    """
    try:
        window = Window(payload["window"]["a"], payload["window"]["b"])
        neuron_count = int(payload["neuron_count"])
        raw_trials = list(payload["trials"])
    except (KeyError, TypeError, ValueError) as e:
        raise SpikeDataError(f"Estrutura de TrialSet inválida: {e}") from e

    trial_windows = payload.get("trial_windows")
    if trial_windows:
        window, raw_trials = _rebase_trials(raw_trials, trial_windows, window)

    try:
        trials = tuple(
            Trial(tuple(SpikeTrain(times) for times in trains), window) for trains in raw_trials
        )
    except (TypeError, ValueError) as e:
        raise SpikeDataError(f"Tempos de spike inválidos: {e}") from e

    ts = TrialSet(trials, neuron_count)
    return ensure_valid(ts) if validate_data else ts


def trial_set_to_dict(ts: TrialSet) -> dict:
    """Forma JSON de um TrialSet."""
    return {
        "window": {"a": ts.window.a, "b": ts.window.b},
        "neuron_count": ts.neuron_count,
        "trials": [[train.times.tolist() for train in trial.trains] for trial in ts.trials],
    }


# ================================================================================================ #
#                                          LEITURA DE ARQUIVOS                                     #
# ================================================================================================ #
def _infer_format(path: Path, file_format: FileFormat | str | None) -> FileFormat:
    if file_format is not None:
        try:
            return FileFormat(file_format)
        except ValueError as e:
            raise SpikeDataError(f"Formato desconhecido: {file_format!r}") from e
    if path.suffix.lower() == ".json":
        return FileFormat.JSON
    return FileFormat.CSV


def sidecar_path(path: Path, suffix: str) -> Path:
    """Caminho de um arquivo auxiliar ao lado de `path`, ex.: dados.csv.header.json."""
    return path.with_name(path.name + suffix)


def _read_csv_header(path: Path) -> dict:
    """Lê o cabeçalho `# window_a=… window_b=… neurons=… trials=…` ou o sidecar JSON."""
    header: dict = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            header.update(dict(HEADER_PATTERN.findall(line)))

    if not header:
        sidecar = sidecar_path(path, ".header.json")
        if not sidecar.exists():
            raise SpikeDataError(f"{path}: cabeçalho ausente (comentário ou {sidecar.name})")
        with open(sidecar, encoding="utf-8") as fh:
            meta = json.load(fh)
        return {
            "window_a": meta["window"]["a"],
            "window_b": meta["window"]["b"],
            "neurons": meta["neuron_count"],
            "trials": meta["trials"],
            "trial_windows": meta.get("trial_windows"),
        }
    return header


def _load_csv(path: Path) -> dict:
    header = _read_csv_header(path)
    try:
        a, b = float(header["window_a"]), float(header["window_b"])
        neurons, trial_count = int(header["neurons"]), int(header["trials"])
    except (KeyError, ValueError) as e:
        raise SpikeDataError(f"{path}: cabeçalho incompleto ou inválido ({e})") from e

    try:
        df = pd.read_csv(path, comment="#", skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SpikeDataError(f"{path}: erro de leitura do CSV ({e})") from e

    if list(df.columns) != CSV_COLUMNS:
        raise SpikeDataError(
            f"{path}: colunas esperadas {CSV_COLUMNS}, encontradas {list(df.columns)}"
        )

    try:
        df = df.astype({"trial_id": np.int64, "neuron_id": np.int64, "spike_time": np.float64})
    except (ValueError, TypeError) as e:
        raise SpikeDataError(f"{path}: valores não numéricos ({e})") from e

    # Ids fora do cabeçalho
    bad_trial = df[(df.trial_id < 1) | (df.trial_id > trial_count)]
    if not bad_trial.empty:
        raise SpikeDataError(
            f"{path}: trial_id {bad_trial.trial_id.iloc[0]} fora de 1..{trial_count}"
        )
    bad_neuron = df[(df.neuron_id < 1) | (df.neuron_id > neurons)]
    if not bad_neuron.empty:
        raise SpikeDataError(
            f"{path}: neuron_id {bad_neuron.neuron_id.iloc[0]} fora de 1..{neurons} "
            "(inconsistent neuron count)"
        )

    df = df.sort_values(["trial_id", "neuron_id", "spike_time"], kind="stable")
    groups = {key: g.spike_time.to_numpy() for key, g in df.groupby(["trial_id", "neuron_id"])}
    trials = [
        [groups.get((k, n), np.empty(0)) for n in range(1, neurons + 1)]
        for k in range(1, trial_count + 1)
    ]
    payload = {"window": {"a": a, "b": b}, "neuron_count": neurons, "trials": trials}
    if header.get("trial_windows"):
        payload["trial_windows"] = header["trial_windows"]
    return payload


def _load_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as e:
        raise SpikeDataError(f"{path}: JSON inválido ({e})") from e

    # Cada trem é ordenado na leitura; empates continuam sendo erro
    try:
        payload["trials"] = [
            [np.sort(np.asarray(times, dtype=np.float64)) for times in trains]
            for trains in payload["trials"]
        ]
    except (KeyError, TypeError, ValueError) as e:
        raise SpikeDataError(f"{path}: estrutura de trials inválida ({e})") from e
    return payload


def load_trial_set(
    path: str | os.PathLike, file_format: FileFormat | str | None = None
) -> TrialSet:
    """
    Lê um TrialSet de um arquivo CSV ou JSON.

    Parâmetros:
    path (str | PathLike): Caminho do arquivo.
    file_format (FileFormat | str | None): Formato; inferido pela extensão quando omitido.

    Retorna:
    TrialSet: O conjunto validado, com os tempos ordenados em cada trem.

    Levanta:
    SpikeDataError: arquivo ausente, erro de parse, tempo duplicado, tempo fora da janela ou
    número de neurônios inconsistente.
    """
    path = Path(path)
    if not path.exists():
        raise SpikeDataError(f"Arquivo não encontrado: {path}")

    fmt = _infer_format(path, file_format)
    logger.debug("Carregando %s (%s)", path, fmt.value)
    payload = _load_csv(path) if fmt is FileFormat.CSV else _load_json(path)
    ts = trial_set_from_dict(payload, validate_data=False)
    ensure_valid(ts, str(path))

    logger.info("TrialSet carregado de %s: M=%d, n=%d", path, ts.M, ts.neuron_count)
    return ts


# ================================================================================================ #
#                                          ESCRITA DE ARQUIVOS                                     #
# ================================================================================================ #
def trial_set_to_frame(ts: TrialSet) -> pd.DataFrame:
    """Forma longa (trial_id, neuron_id, spike_time) de um TrialSet."""
    rows = [
        (k, n, t)
        for k, trial in enumerate(ts.trials, start=1)
        for n, train in enumerate(trial.trains, start=1)
        for t in train.times
    ]
    df = pd.DataFrame(rows, columns=CSV_COLUMNS)
    return df.astype({"trial_id": np.int64, "neuron_id": np.int64, "spike_time": np.float64})


def write_trial_set(
    ts: TrialSet, path: str | os.PathLike, file_format: FileFormat | str | None = None
) -> Path:
    """
    Escreve um TrialSet em CSV (com cabeçalho em comentário, 12 dígitos significativos)
    ou em JSON.
    """
    path = Path(path)
    fmt = _infer_format(path, file_format)
    path.parent.mkdir(parents=True, exist_ok=True)

    if fmt is FileFormat.CSV:
        header = (
            f"# window_a={ts.window.a!r} window_b={ts.window.b!r} "
            f"neurons={ts.neuron_count} trials={ts.M}\n"
        )
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(header)
            trial_set_to_frame(ts).to_csv(fh, index=False, float_format="%.12g")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(trial_set_to_dict(ts), fh)

    logger.debug("TrialSet escrito em %s", path)
    return path
