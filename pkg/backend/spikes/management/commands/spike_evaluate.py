"""Comando `spike_evaluate`: procedimento P de Monte-Carlo para um framework"""

import logging

from ...harness import run_procedure_P, write_curves
from ._base import EvaluationCommand, curve_rows, report_summary

logger = logging.getLogger(__name__)


class Command(EvaluationCommand):
    """
    Executa R repetições do procedimento P e grava as curvas KS-vs-M, taxa-vs-M e de
    p-valores ordenados em <out-dir>/curves/<experimento>/.

    As curvas e o meta.json são regravados ao fim de cada lote, então uma execução
    interrompida deixa arquivos válidos com as repetições já concluídas.
    """

    help = (
        "Avalia GAUE e UE por Monte-Carlo (procedimento P) sobre uma grade de M e grava as "
        "curvas em CSV. Saída JSON com os metadados e os identificadores das curvas."
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--experiment",
            default=None,
            help="Nome do experimento (padrão: evaluate-<framework>-seed<seed>).",
        )

    def run(self, options: dict) -> None:
        run = self.build_run(options)
        experiment = options["experiment"] or (
            f"evaluate-{run.cfg.framework.value}-seed{run.cfg.seed}"
        )
        out_dir = self.out_dir(options)

        def flush(partial_report):
            write_curves(partial_report.curves, out_dir, experiment, partial_report.meta())

        logger.info(
            "Procedimento P: %s, R=%d, M=%s", run.cfg.framework.value, run.repetitions, run.m_grid
        )
        report = run_procedure_P(run, on_batch=flush)
        target = write_curves(report.curves, out_dir, experiment, report.meta())
        self.emit(report_summary(report, target), options, rows=curve_rows(report))
