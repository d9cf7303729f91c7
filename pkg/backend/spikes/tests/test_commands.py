"""Testes dos comandos de linha de comando (call_command)"""

import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from spikes.simulate import FrameworkConfig, sample_framework, write_simulation
from spikes.spike_data import write_trial_set
from spikes.utils import Framework

from .factories import make_trial_set


def run_command(*args) -> dict:
    """Executa o comando e retorna o JSON do stdout."""
    out = StringIO()
    call_command(*args, stdout=out, stderr=StringIO())
    return json.loads(out.getvalue())


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def assertCommandFails(self, returncode: int, *args) -> tuple[dict, str]:
        """Verifica o código de saída; retorna o JSON do erro e o stdout."""
        out = StringIO()
        with self.assertRaises(CommandError) as cm:
            call_command(*args, stdout=out, stderr=StringIO())
        self.assertEqual(cm.exception.returncode, returncode)
        message = str(cm.exception)
        payload = json.loads(message) if message.startswith("{") else {"error": message}
        return payload, out.getvalue()


class SpikeTestCommandTest(CommandTestCase):
    def setUp(self):
        super().setUp()
        ts, params = sample_framework(FrameworkConfig(Framework.F1, M=20, seed=3))
        self.data, _ = write_simulation(ts, params, self.dir / "f1.csv")

    def test_single_pattern(self):
        result = run_command("spike_test", str(self.data), "--pattern", "1,2")
        self.assertEqual(result["pattern"], [1, 2])
        self.assertEqual(result["method"], "gaue")
        self.assertTrue(0.0 <= result["p"] <= 1.0)
        self.assertIn("computation", result)

    def test_single_pattern_ue(self):
        result = run_command(
            "spike_test", str(self.data), "--pattern", "1,3,4", "--method", "ue"
        )
        self.assertEqual(result["pattern"], [1, 3, 4])
        self.assertAlmostEqual(result["bin_width"], 0.02)

    def test_multi(self):
        result = run_command("spike_test", str(self.data), "--multi", "--q", "0.1")
        self.assertEqual(len(result["patterns"]), 11)
        self.assertEqual(result["bh"]["K"], 11)
        self.assertEqual(result["bh"]["q"], 0.1)

    def test_pretty_table(self):
        out = StringIO()
        call_command("spike_test", str(self.data), "--multi", "--pretty", stdout=out)
        self.assertIn("pattern", out.getvalue())
        self.assertIn("reject", out.getvalue())

    def test_pattern_and_multi_are_exclusive(self):
        payload, _ = self.assertCommandFails(1, "spike_test", str(self.data))
        self.assertEqual(payload["kind"], "usage")
        self.assertCommandFails(1, "spike_test", str(self.data), "--multi", "--pattern", "1,2")

    def test_pattern_outside_data(self):
        payload, _ = self.assertCommandFails(1, "spike_test", str(self.data), "--pattern", "1,7")
        self.assertEqual(payload["kind"], "ParameterError")

    def test_missing_file(self):
        payload, _ = self.assertCommandFails(
            1, "spike_test", str(self.dir / "nope.csv"), "--pattern", "1,2"
        )
        self.assertEqual(payload["kind"], "SpikeDataError")

    def test_invalid_data_lists_violations(self):
        path = self.dir / "bad.csv"
        path.write_text(
            "# window_a=0 window_b=1 neurons=2 trials=1\n"
            "trial_id,neuron_id,spike_time\n1,1,0.3\n1,1,0.3\n",
            encoding="utf-8",
        )
        payload, _ = self.assertCommandFails(1, "spike_test", str(path), "--pattern", "1,2")
        self.assertEqual(payload["violations"][0]["trial"], 1)

    def test_silent_neuron_exits_with_degenerate_code(self):
        ts = make_trial_set([[[0.1, 0.4], []], [[0.2], []]])
        path = write_trial_set(ts, self.dir / "silent.json")
        payload, stdout = self.assertCommandFails(2, "spike_test", str(path), "--pattern", "1,2")
        self.assertEqual(payload["flag"], "zero_intensity")
        self.assertEqual(json.loads(stdout)["flags"], ["zero_intensity"])

    def test_usage_error_from_parser(self):
        self.assertCommandFails(1, "spike_test", str(self.data), "--method", "chi2")


class SpikeSimulateCommandTest(CommandTestCase):
    def test_same_seed_same_bytes(self):
        paths = []
        for name in ("a.csv", "b.csv"):
            result = run_command(
                "spike_simulate",
                "--framework",
                "F4",
                "--M",
                "5",
                "--seed",
                "11",
                "--out",
                str(self.dir / name),
            )
            self.assertEqual(result["seed"], 11)
            self.assertEqual(result["M"], 5)
            paths.append(Path(result["data"]))
        self.assertEqual(paths[0].read_bytes(), paths[1].read_bytes())
        params = json.loads(Path(f"{paths[0]}.params.json").read_text(encoding="utf-8"))
        self.assertEqual(params["framework"], "F4")

    def test_seed_is_drawn_and_echoed(self):
        result = run_command(
            "spike_simulate", "--framework", "F1", "--M", "2", "--out", str(self.dir / "x.json")
        )
        self.assertIsInstance(result["seed"], int)
        self.assertEqual(result["parameters"]["seed"], result["seed"])

    def test_zero_trials_is_usage_error(self):
        self.assertCommandFails(
            1, "spike_simulate", "--framework", "F1", "--M", "0", "--out", str(self.dir / "z.csv")
        )

    def test_unknown_framework(self):
        self.assertCommandFails(1, "spike_simulate", "--framework", "F9", "--M", "3")


class EvaluationCommandsTest(CommandTestCase):
    def test_evaluate(self):
        result = run_command(
            "spike_evaluate",
            "--framework",
            "F1",
            "--seed",
            "5",
            "--repetitions",
            "3",
            "--M-grid",
            "5,10",
            "--methods",
            "gaue",
            "--batch-size",
            "2",
            "--out-dir",
            str(self.dir),
            "--experiment",
            "demo",
        )
        target = self.dir / "curves" / "demo"
        self.assertEqual(result["dir"], str(target))
        self.assertEqual(result["completed_repetitions"], 3)
        self.assertIn("ks_vs_M-statistics-gaue", result["curves"])
        self.assertTrue((target / "meta.json").exists())
        self.assertTrue((target / "rate_vs_M-gaue-alpha0.05.csv").exists())

    def test_evaluate_default_experiment_name(self):
        result = run_command(
            "spike_evaluate",
            "--framework",
            "F2",
            "--seed",
            "8",
            "--repetitions",
            "1",
            "--M-grid",
            "5:10:5",
            "--methods",
            "ue",
            "--out-dir",
            str(self.dir),
        )
        self.assertTrue(result["dir"].endswith("evaluate-F2-seed8"))
        self.assertEqual(result["run"]["m_grid"], [5, 10])

    def test_repetitions_and_desk_conflict(self):
        payload, _ = self.assertCommandFails(
            1, "spike_evaluate", "--framework", "F1", "--repetitions", "3", "--desk"
        )
        self.assertEqual(payload["kind"], "usage")

    def test_invalid_grid(self):
        self.assertCommandFails(1, "spike_evaluate", "--framework", "F1", "--M-grid", "10:5:0")

    def test_scan(self):
        result = run_command(
            "spike_scan",
            "--framework",
            "F1",
            "--seed",
            "2",
            "--repetitions",
            "1",
            "--M-grid",
            "5",
            "--methods",
            "gaue",
            "--lambda-grid",
            "10",
            "--duration-grid",
            "0.2,0.3",
            "--out-dir",
            str(self.dir),
        )
        self.assertEqual(result["experiment"], "scan-F1-seed2")
        self.assertEqual(set(result["cells"]), {"lambda10_T0.2", "lambda10_T0.3"})
        cell = self.dir / "curves" / "scan-F1-seed2" / "lambda10_T0.2"
        self.assertTrue((cell / "meta.json").exists())

    def test_detect(self):
        result = run_command(
            "spike_detect",
            "--framework",
            "F2",
            "--M",
            "10",
            "--repetitions",
            "2",
            "--methods",
            "gaue",
            "--seed",
            "4",
            "--out-dir",
            str(self.dir),
        )
        self.assertEqual(result["repetitions"], 2)
        self.assertEqual(len(result["frequencies"]["gaue"]), 11)
        self.assertTrue(Path(result["dir"]).is_dir())
