"""
Base dos comandos de linha de comando.

Saída em JSON no stdout (tabela legível com --pretty), erros em JSON no stderr e códigos de
saída 0 (sucesso), 1 (uso ou E/S) e 2 (estatística indefinida).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import pandas as pd
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError, handle_default_options

from ...exceptions import (
    CapacityError,
    DegenerateStatisticError,
    ParameterError,
    SpikeDataError,
)
from ...harness import EvalReport, EvalRun
from ...simulate import FrameworkConfig, draw_seed
from ...spike_data import PatternSubset
from ...utils import (
    DEFAULT_ALPHA,
    DEFAULT_BATCH_SIZE,
    DEFAULT_DELTA,
    DEFAULT_M_GRID,
    DEFAULT_REPETITIONS,
    DEFAULT_SORTED_M,
    DESK_REPETITIONS,
    ConstellationMatch,
    CurveKind,
    FileFormat,
    Framework,
    TestMethod,
)

logger = logging.getLogger(__name__)

EXIT_USAGE = 1
EXIT_DEGENERATE = 2


# ================================================================================================ #
#                                        CONVERSORES DE FLAGS                                      #
# ================================================================================================ #
def positive_int(text: str) -> int:
    """Inteiro ≥ 1."""
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"inteiro inválido: {text!r}") from e
    if value < 1:
        raise argparse.ArgumentTypeError(f"deve ser ≥ 1: {value}")
    return value


def non_negative_int(text: str) -> int:
    """Inteiro ≥ 0."""
    try:
        value = int(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"inteiro inválido: {text!r}") from e
    if value < 0:
        raise argparse.ArgumentTypeError(f"deve ser ≥ 0: {value}")
    return value


def float_list(text: str) -> tuple[float, ...]:
    """Lista "8,15,20"."""
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"lista de números inválida: {text!r}") from e
    if not values:
        raise argparse.ArgumentTypeError("lista vazia")
    return values


def int_grid(text: str) -> tuple[int, ...]:
    """Grade "início:fim:passo" (fim incluído) ou lista "10,20,50"."""
    try:
        if ":" in text:
            start, stop, step = (int(part) for part in text.split(":"))
            if step < 1:
                raise ValueError(text)
            values = tuple(range(start, stop + 1, step))
        else:
            values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"grade inválida: {text!r}") from e
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"grade deve ter valores ≥ 1: {text!r}")
    return values


def method_list(text: str) -> tuple[TestMethod, ...]:
    """Lista de métodos "gaue,ue"."""
    try:
        return tuple(TestMethod(part.strip()) for part in text.split(",") if part.strip())
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"método desconhecido em {text!r}") from e


def to_json(payload: dict) -> str:
    """JSON determinístico (chaves ordenadas)."""
    return json.dumps(payload, indent=2, sort_keys=True, default=str)


# ================================================================================================ #
#                                             COMANDO                                              #
# ================================================================================================ #
class CoincideCommand(BaseCommand):
    """
    Comando base: erros de argparse e da biblioteca viram JSON no stderr e códigos de saída.

    Subclasses implementam `run(options)` e escrevem o resultado com `emit`.
    """

    requires_system_checks = []
    uses_seed = False

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        # Erros de parse levantam CommandError em vez de sair com o código 2 do argparse
        parser.called_from_command_line = False
        return parser

    def add_arguments(self, parser):
        parser.add_argument(
            "--pretty", action="store_true", help="Tabela legível no stdout em vez de JSON."
        )
        if self.uses_seed:
            parser.add_argument(
                "--seed",
                type=non_negative_int,
                default=None,
                help="Semente do gerador. Sem ela, uma semente é sorteada e ecoada na saída.",
            )

    def add_threads_argument(self, parser):
        """Flag --threads, com COINCIDE_THREADS como valor padrão."""
        parser.add_argument(
            "--threads",
            type=positive_int,
            default=None,
            help="Workers do dask (padrão: COINCIDE_THREADS).",
        )

    def add_format_argument(self, parser):
        """Flag --format (csv ou json); sem ela vale a extensão do arquivo."""
        parser.add_argument(
            "--format",
            dest="file_format",
            choices=[f.value for f in FileFormat],
            default=None,
            help="Formato do arquivo de spikes (padrão: pela extensão).",
        )

    def run_from_argv(self, argv):
        self._called_from_command_line = True
        try:
            parser = self.create_parser(argv[0], argv[1])
            options = parser.parse_args(argv[2:])
        except CommandError as e:
            self.stderr.write(to_json({"error": str(e), "kind": "usage"}))
            sys.exit(EXIT_USAGE)

        cmd_options = vars(options)
        args = cmd_options.pop("args", ())
        handle_default_options(options)
        try:
            self.execute(*args, **cmd_options)
        except CommandError as e:
            if options.traceback:
                raise
            self.stderr.write(str(e))
            sys.exit(e.returncode)

    def handle(self, *args, **options):
        if self.uses_seed and options.get("seed") is None:
            options["seed"] = draw_seed()
            logger.info("Semente sorteada: %d", options["seed"])
        if "threads" in options and options["threads"] is None:
            options["threads"] = settings.COINCIDE["THREADS"]

        try:
            self.run(options)
        except DegenerateStatisticError as e:
            logger.warning("Estatística indefinida: %s", str(e))
            raise CommandError(
                to_json({"error": str(e), "kind": "degenerate", "flag": e.flag}),
                returncode=EXIT_DEGENERATE,
            ) from e
        except (SpikeDataError, ParameterError, CapacityError) as e:
            logger.error("Erro: %s", str(e))
            payload = {"error": str(e), "kind": type(e).__name__}
            violations = getattr(e, "violations", None)
            if violations:
                payload["violations"] = [v.to_dict() for v in violations]
            raise CommandError(to_json(payload), returncode=EXIT_USAGE) from e
        except OSError as e:
            logger.error("Erro de E/S: %s", str(e))
            raise CommandError(
                to_json({"error": str(e), "kind": "io"}), returncode=EXIT_USAGE
            ) from e

    def run(self, options: dict) -> None:
        """Executa o comando."""
        raise NotImplementedError

    def degenerate_error(self, flags) -> CommandError:
        """Saída 2 depois de reportar resultados com estatística indefinida."""
        values = sorted({getattr(flag, "value", flag) for flag in flags})
        payload = {"error": "Estatística indefinida", "kind": "degenerate", "flags": values}
        return CommandError(to_json(payload), returncode=EXIT_DEGENERATE)

    def usage_error(self, message: str) -> CommandError:
        """Erro de uso detectado depois do parse (combinação inválida de flags)."""
        return CommandError(to_json({"error": message, "kind": "usage"}), returncode=EXIT_USAGE)

    def emit(self, payload: dict, options: dict, rows: list[dict] | None = None) -> None:
        """Escreve o resultado: JSON, ou a tabela das linhas com --pretty."""
        if options.get("pretty") and rows:
            self.stdout.write(pd.DataFrame(rows).to_string(index=False))
        else:
            self.stdout.write(to_json(payload))


# ================================================================================================ #
#                                       COMANDOS DE AVALIAÇÃO                                      #
# ================================================================================================ #
class EvaluationCommand(CoincideCommand):
    """Flags comuns ao procedimento P e ao scan de parâmetros."""

    uses_seed = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--framework", required=True, choices=[f.value for f in Framework], help="Framework."
        )
        parser.add_argument(
            "--repetitions",
            type=positive_int,
            default=None,
            help=f"Número de repetições R (padrão: {DEFAULT_REPETITIONS}).",
        )
        parser.add_argument(
            "--desk",
            action="store_true",
            help=f"Execução reduzida com {DESK_REPETITIONS} repetições.",
        )
        parser.add_argument(
            "--M-grid",
            type=int_grid,
            default=DEFAULT_M_GRID,
            help='Grade de M, "início:fim:passo" ou lista (padrão: 10:100:10).',
        )
        parser.add_argument(
            "--methods",
            type=method_list,
            default=(TestMethod.GAUE, TestMethod.UE),
            help='Métodos avaliados (padrão: "gaue,ue").',
        )
        parser.add_argument(
            "--alphas", type=float_list, default=(DEFAULT_ALPHA,), help="Níveis α das taxas."
        )
        parser.add_argument(
            "--sorted-M",
            type=positive_int,
            default=DEFAULT_SORTED_M,
            help="M da curva de p-valores ordenados.",
        )
        parser.add_argument(
            "--pattern", default=None, help='Padrão testado (padrão: "1,2,3,4").'
        )
        parser.add_argument(
            "--delta", type=float, default=DEFAULT_DELTA, help="Atraso δ em segundos."
        )
        parser.add_argument(
            "--bin-width", type=float, default=None, help="Largura dos bins do UE (padrão: 2δ)."
        )
        parser.add_argument(
            "--match",
            choices=[m.value for m in ConstellationMatch],
            default=ConstellationMatch.EXACT.value,
            help="Contagem de constelações do UE.",
        )
        parser.add_argument(
            "--batch-size",
            type=positive_int,
            default=DEFAULT_BATCH_SIZE,
            help="Repetições por lote; os arquivos parciais são gravados a cada lote.",
        )
        parser.add_argument(
            "--out-dir",
            default=None,
            help="Diretório das curvas (padrão: COINCIDE_OUTPUT_DIR).",
        )
        self.add_threads_argument(parser)

    def build_run(self, options: dict) -> EvalRun:
        """Monta o EvalRun a partir das flags."""
        if options["repetitions"] is not None and options["desk"]:
            raise self.usage_error("--repetitions e --desk são mutuamente exclusivos")
        repetitions = options["repetitions"] or (
            DESK_REPETITIONS if options["desk"] else DEFAULT_REPETITIONS
        )
        m_grid = tuple(sorted(set(options["M_grid"])))
        extra = {}
        if options["pattern"] is not None:
            extra["pattern"] = PatternSubset.parse(options["pattern"]).indices

        cfg = FrameworkConfig(
            framework=options["framework"],
            M=m_grid[-1],
            seed=options["seed"],
            delta=options["delta"],
            event_cap=settings.COINCIDE["HAWKES_EVENT_CAP"],
        )
        return EvalRun(
            cfg=cfg,
            repetitions=repetitions,
            m_grid=m_grid,
            methods=options["methods"],
            alphas=options["alphas"],
            sorted_m=options["sorted_M"],
            delta=options["delta"],
            bin_width=options["bin_width"],
            match=options["match"],
            batch_size=options["batch_size"],
            threads=options["threads"],
            scheduler=settings.COINCIDE["DASK_SCHEDULER"],
            **extra,
        )

    def out_dir(self, options: dict) -> Path:
        """Diretório de saída das curvas."""
        return Path(options["out_dir"] or settings.COINCIDE["OUTPUT_DIR"])


def curve_rows(report: EvalReport) -> list[dict]:
    """Linhas da tabela --pretty: uma por M com as curvas KS e de taxa."""
    rows = {}
    for curve in report.curves:
        if curve.kind not in (CurveKind.KS_VS_M, CurveKind.RATE_VS_M):
            continue
        column = curve.curve_id.removeprefix(f"{curve.kind.value}-")
        for x, y in zip(curve.x, curve.y):
            rows.setdefault(int(x), {"M": int(x)})[column] = round(y, 4)
    return [rows[M] for M in sorted(rows)]


def report_summary(report: EvalReport, target: Path) -> dict:
    """Resumo JSON de um relatório: metadados, diretório e identificadores das curvas."""
    return {**report.meta(), "dir": str(target), "curves": [c.curve_id for c in report.curves]}
