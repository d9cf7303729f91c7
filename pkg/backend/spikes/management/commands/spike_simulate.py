"""Comando `spike_simulate`: gera os trials de um framework e grava em arquivo"""

import logging
from pathlib import Path

from django.conf import settings

from ...simulate import FrameworkConfig, sample_framework, write_simulation
from ...utils import FileFormat, Framework
from ._base import CoincideCommand, non_negative_int, positive_int

logger = logging.getLogger(__name__)


class Command(CoincideCommand):
    """Simula M trials de F1..F4 e grava o TrialSet e o sidecar de parâmetros."""

    help = (
        "Simula M trials de um framework (F1/F2 Poisson, F3/F4 Hawkes) e grava o arquivo de "
        "spikes junto com <arquivo>.params.json. A mesma semente gera arquivos idênticos."
    )
    uses_seed = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument(
            "--framework", required=True, choices=[f.value for f in Framework], help="Framework."
        )
        parser.add_argument("--M", type=positive_int, required=True, help="Número de trials.")
        parser.add_argument(
            "--repetition",
            type=non_negative_int,
            default=0,
            help="Índice da repetição (sub-fluxo do gerador).",
        )
        parser.add_argument(
            "--out",
            default=None,
            help="Arquivo de saída (padrão: <OUTPUT_DIR>/<framework>-M<M>-seed<seed>.csv).",
        )
        self.add_format_argument(parser)

    def run(self, options: dict) -> None:
        cfg = FrameworkConfig(
            framework=options["framework"],
            M=options["M"],
            seed=options["seed"],
            event_cap=settings.COINCIDE["HAWKES_EVENT_CAP"],
        )
        out = options["out"]
        if out is None:
            suffix = options["file_format"] or FileFormat.CSV.value
            name = f"{cfg.framework.value}-M{cfg.M}-seed{cfg.seed}.{suffix}"
            out = Path(settings.COINCIDE["OUTPUT_DIR"]) / name

        ts, params = sample_framework(cfg, repetition=options["repetition"])
        data_path, params_path = write_simulation(ts, params, out, options["file_format"])
        logger.info("Simulação gravada em %s", data_path)

        payload = {
            "seed": cfg.seed,
            "data": str(data_path),
            "params": str(params_path),
            "M": ts.M,
            "neuron_count": ts.neuron_count,
            "spike_counts": [int(c) for c in ts.total_counts()],
            "parameters": params.to_dict(),
        }
        rows = [
            {"neuron": i + 1, "rate": rate, "spikes": int(count)}
            for i, (rate, count) in enumerate(zip(params.rates, ts.total_counts()))
        ]
        self.emit(payload, options, rows=rows)
