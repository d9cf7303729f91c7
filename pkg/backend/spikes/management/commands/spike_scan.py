"""Comando `spike_scan`: procedimento P em cada célula de uma grade (λ, b − a)"""

import logging

from ...harness import parameter_scan, scan_cell_name, write_curves
from ...utils import DEFAULT_DURATION_GRID, DEFAULT_LAMBDA_GRID
from ._base import EvaluationCommand, curve_rows, float_list, report_summary

logger = logging.getLogger(__name__)


class Command(EvaluationCommand):
    """Scan de parâmetros: uma pasta de curvas por célula da grade."""

    help = (
        "Fixa a taxa λ e a duração b − a em cada célula da grade e executa o procedimento P. "
        "Grava <out-dir>/curves/<experimento>/lambda<λ>_T<duração>/ por célula."
    )

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--lambda-grid",
            type=float_list,
            default=DEFAULT_LAMBDA_GRID,
            help='Taxas λ em Hz (padrão: "8,15,20").',
        )
        parser.add_argument(
            "--duration-grid",
            type=float_list,
            default=DEFAULT_DURATION_GRID,
            help='Durações b − a em segundos (padrão: "0.2,0.3,0.4").',
        )
        parser.add_argument(
            "--experiment",
            default=None,
            help="Nome do experimento (padrão: scan-<framework>-seed<seed>).",
        )

    def run(self, options: dict) -> None:
        run = self.build_run(options)
        experiment = options["experiment"] or f"scan-{run.cfg.framework.value}-seed{run.cfg.seed}"
        out_dir = self.out_dir(options)

        def flush(rate, duration, report):
            cell = f"{experiment}/{scan_cell_name(rate, duration)}"
            write_curves(report.curves, out_dir, cell, report.meta())

        cells = parameter_scan(
            run,
            lambda_grid=options["lambda_grid"],
            duration_grid=options["duration_grid"],
            on_cell=flush,
            on_batch=flush,
        )

        summary = {"seed": run.cfg.seed, "experiment": experiment, "cells": {}}
        rows = []
        for (rate, duration), report in cells.items():
            name = scan_cell_name(rate, duration)
            target = out_dir / "curves" / experiment / name
            summary["cells"][name] = report_summary(report, target)
            rows.extend({"cell": name, **row} for row in curve_rows(report))
        logger.info("Scan concluído: %d células", len(cells))
        self.emit(summary, options, rows=rows)
