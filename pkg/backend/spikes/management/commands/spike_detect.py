"""Comando `spike_detect`: histograma de detecção dos padrões pelo teste múltiplo"""

import logging

from django.conf import settings

from ...harness import detection_histogram, write_curves
from ...simulate import FrameworkConfig
from ...utils import (
    DEFAULT_DELTA,
    DEFAULT_Q,
    DEFAULT_SORTED_M,
    DESK_REPETITIONS,
    Framework,
    TestMethod,
)
from ._base import CoincideCommand, method_list, positive_int

logger = logging.getLogger(__name__)


class Command(CoincideCommand):
    """Frequência de rejeição (BH no nível q) de cada padrão ao longo de R repetições."""

    help = (
        "Simula R repetições de um framework com M trials, testa todos os padrões com "
        "Benjamini-Hochberg e grava a frequência de detecção de cada padrão por método."
    )
    uses_seed = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--framework",
            choices=[f.value for f in Framework],
            default=Framework.F4.value,
            help="Framework (padrão: F4).",
        )
        parser.add_argument(
            "--M", type=positive_int, default=DEFAULT_SORTED_M, help="Trials por repetição."
        )
        parser.add_argument(
            "--repetitions",
            type=positive_int,
            default=DESK_REPETITIONS,
            help=f"Número de repetições (padrão: {DESK_REPETITIONS}).",
        )
        parser.add_argument(
            "--methods",
            type=method_list,
            default=(TestMethod.GAUE, TestMethod.UE),
            help='Métodos (padrão: "gaue,ue").',
        )
        parser.add_argument("--q", type=float, default=DEFAULT_Q, help="Nível de FDR.")
        parser.add_argument(
            "--delta", type=float, default=DEFAULT_DELTA, help="Atraso δ em segundos."
        )
        parser.add_argument(
            "--out-dir", default=None, help="Diretório das curvas (padrão: COINCIDE_OUTPUT_DIR)."
        )
        self.add_threads_argument(parser)

    def run(self, options: dict) -> None:
        cfg = FrameworkConfig(
            framework=options["framework"],
            M=options["M"],
            seed=options["seed"],
            delta=options["delta"],
            event_cap=settings.COINCIDE["HAWKES_EVENT_CAP"],
        )
        report = detection_histogram(
            cfg,
            M=options["M"],
            q=options["q"],
            repetitions=options["repetitions"],
            methods=options["methods"],
            delta=options["delta"],
            threads=options["threads"],
            scheduler=settings.COINCIDE["DASK_SCHEDULER"],
        )
        experiment = f"detect-{cfg.framework.value}-M{cfg.M}-seed{cfg.seed}"
        out_dir = options["out_dir"] or settings.COINCIDE["OUTPUT_DIR"]
        target = write_curves(report.curves, out_dir, experiment, report.meta())

        rows = [
            {"pattern": label, **{m.value: freq[label] for m, freq in report.frequencies.items()}}
            for label in report.curves[0].x
        ]
        self.emit({**report.meta(), "dir": str(target)}, options, rows=rows)
