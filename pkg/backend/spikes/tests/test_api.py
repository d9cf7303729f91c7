"""Testes das rotas da API"""

from django.urls import reverse
from rest_framework import status
from rest_framework.test import APISimpleTestCase

from spikes.simulate import FrameworkConfig, sample_framework
from spikes.spike_data import trial_set_to_dict
from spikes.utils import Framework

from .factories import make_trial_set


class ApiTestCase(APISimpleTestCase):
    def setUp(self):
        ts, _ = sample_framework(FrameworkConfig(Framework.F1, M=15, seed=21))
        self.trial_set = trial_set_to_dict(ts)

    def post(self, name: str, body: dict):
        return self.client.post(reverse(name), body, format="json")


class GaueTestViewTest(ApiTestCase):
    def test_ok(self):
        response = self.post("gaue_test", {"trial_set": self.trial_set, "pattern": [1, 2]})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data["pattern"], [1, 2])
        self.assertEqual(response.data["method"], "gaue")
        self.assertIn("sigma2_hat", response.data["computation"])

    def test_pattern_as_text(self):
        response = self.post("gaue_test", {"trial_set": self.trial_set, "pattern": "2,4,3"})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data["pattern"], [2, 3, 4])

    def test_invalid_pattern(self):
        response = self.post("gaue_test", {"trial_set": self.trial_set, "pattern": [1, 9]})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn("pattern", response.data["error"])

    def test_invalid_trial_set(self):
        body = {"window": {"a": 0, "b": 1}, "neuron_count": 2, "trials": [[[0.5, 0.4], [0.1]]]}
        response = self.post("gaue_test", {"trial_set": body, "pattern": [1, 2]})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertIn("trial_set", response.data["error"])

    def test_delta_too_large(self):
        response = self.post(
            "gaue_test", {"trial_set": self.trial_set, "pattern": [1, 2], "delta": 5.0}
        )
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)

    def test_zero_intensity_is_unprocessable(self):
        silent = trial_set_to_dict(make_trial_set([[[0.1, 0.4], []], [[0.2], []]]))
        response = self.post("gaue_test", {"trial_set": silent, "pattern": [1, 2]})
        self.assertEqual(response.status_code, status.HTTP_422_UNPROCESSABLE_ENTITY)
        self.assertEqual(response.data["flag"], "zero_intensity")


class UeTestViewTest(ApiTestCase):
    def test_ok(self):
        response = self.post(
            "ue_test",
            {"trial_set": self.trial_set, "pattern": [1, 3], "bin_width": 0.01, "alpha": 0.1},
        )
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(response.data["method"], "ue")
        self.assertEqual(response.data["bin_width"], 0.01)

    def test_invalid_match(self):
        response = self.post(
            "ue_test", {"trial_set": self.trial_set, "pattern": [1, 3], "match": "fuzzy"}
        )
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)


class MultiPatternViewTest(ApiTestCase):
    def test_ok(self):
        response = self.post("multi_pattern", {"trial_set": self.trial_set, "method": "ue"})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertEqual(len(response.data["patterns"]), 11)
        self.assertEqual(response.data["bh"]["K"], 11)

    def test_neuron_cap(self):
        trials = [[[0.05 * (n + 1)] for n in range(12)] for _ in range(2)]
        wide = trial_set_to_dict(make_trial_set(trials))
        response = self.post("multi_pattern", {"trial_set": wide})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)


class SimulateViewTest(ApiTestCase):
    def test_seeded_simulation_is_reproducible(self):
        body = {"framework": "F3", "M": 4, "seed": 17}
        first = self.post("simulate", body)
        second = self.post("simulate", body)
        self.assertEqual(first.status_code, status.HTTP_200_OK)
        self.assertEqual(first.data, second.data)
        self.assertEqual(len(first.data["trial_set"]["trials"]), 4)
        self.assertEqual(first.data["parameters"]["seed"], 17)

    def test_seed_is_drawn(self):
        response = self.post("simulate", {"framework": "F1", "M": 2})
        self.assertEqual(response.status_code, status.HTTP_200_OK)
        self.assertIsInstance(response.data["parameters"]["seed"], int)

    def test_invalid_request(self):
        response = self.post("simulate", {"framework": "F7", "M": 0})
        self.assertEqual(response.status_code, status.HTTP_400_BAD_REQUEST)
        self.assertEqual(set(response.data["error"]), {"framework", "M"})

    def test_get_not_allowed(self):
        response = self.client.get(reverse("simulate"))
        self.assertEqual(response.status_code, status.HTTP_405_METHOD_NOT_ALLOWED)
