"""Módulo que serializa as requisições e respostas da API de testes de independência"""

from rest_framework import serializers

from .exceptions import ParameterError, SpikeDataError
from .spike_data import PatternSubset, trial_set_from_dict, trial_set_to_dict
from .utils import (
    DEFAULT_ALPHA,
    DEFAULT_DELTA,
    DEFAULT_Q,
    ConstellationMatch,
    Framework,
    TestMethod,
)

# ================================================================================================ #
#                                              CAMPOS                                              #
# ================================================================================================ #


class TrialSetField(serializers.Field):
    """
    Campo com um TrialSet na forma JSON `{window: {a, b}, neuron_count, trials}`.

    A validação completa (ordenação, duplicatas, janela) é feita na entrada; as violações
    voltam como lista de mensagens.
    """

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError("trial_set deve ser um objeto JSON")
        try:
            return trial_set_from_dict(data)
        except SpikeDataError as e:
            if e.violations:
                raise serializers.ValidationError([str(v.to_dict()) for v in e.violations]) from e
            raise serializers.ValidationError(str(e)) from e
        except ParameterError as e:
            raise serializers.ValidationError(str(e)) from e

    def to_representation(self, value):
        return trial_set_to_dict(value)


class PatternField(serializers.Field):
    """Padrão 𝓛 como lista de índices (`[1, 3, 4]`) ou texto (`"1,3,4"`)."""

    def to_internal_value(self, data):
        try:
            if isinstance(data, str):
                return PatternSubset.parse(data)
            if isinstance(data, list):
                return PatternSubset(tuple(int(i) for i in data))
        except (ParameterError, TypeError, ValueError) as e:
            raise serializers.ValidationError(str(e)) from e
        raise serializers.ValidationError("pattern deve ser uma lista de índices ou um texto")

    def to_representation(self, value):
        return list(value.indices)


# ================================================================================================ #
#                                            REQUISIÇÕES                                           #
# ================================================================================================ #


class PatternRequestSerializer(serializers.Serializer):
    """Base das requisições de teste sobre um único padrão"""

    trial_set = TrialSetField()
    pattern = PatternField()
    alpha = serializers.FloatField(default=DEFAULT_ALPHA, min_value=0.0, max_value=1.0)
    delta = serializers.FloatField(default=DEFAULT_DELTA, min_value=0.0)

    def validate(self, attrs):
        try:
            attrs["pattern"].check(attrs["trial_set"].neuron_count)
        except ParameterError as e:
            raise serializers.ValidationError({"pattern": str(e)}) from e
        return attrs


class GaueTestSerializer(PatternRequestSerializer):
    """Requisição do teste GAUE"""


class UeTestSerializer(PatternRequestSerializer):
    """Requisição do teste Unitary Events binado"""

    bin_width = serializers.FloatField(required=False, allow_null=True, default=None)
    match = serializers.ChoiceField(
        choices=[m.value for m in ConstellationMatch], default=ConstellationMatch.EXACT.value
    )


class MultiPatternSerializer(serializers.Serializer):
    """Requisição do teste sobre todos os padrões com Benjamini-Hochberg"""

    trial_set = TrialSetField()
    delta = serializers.FloatField(default=DEFAULT_DELTA, min_value=0.0)
    q = serializers.FloatField(default=DEFAULT_Q, min_value=0.0, max_value=1.0)
    method = serializers.ChoiceField(
        choices=[m.value for m in TestMethod], default=TestMethod.GAUE.value
    )
    bin_width = serializers.FloatField(required=False, allow_null=True, default=None)
    match = serializers.ChoiceField(
        choices=[m.value for m in ConstellationMatch], default=ConstellationMatch.EXACT.value
    )


class SimulateSerializer(serializers.Serializer):
    """Requisição de simulação de um framework"""

    framework = serializers.ChoiceField(choices=[f.value for f in Framework])
    M = serializers.IntegerField(min_value=1, max_value=10_000)  # pylint: disable=invalid-name
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)


# ================================================================================================ #
#                                             RESPOSTAS                                            #
# ================================================================================================ #


class TestOutcomeSerializer(serializers.Serializer):  # pylint: disable=abstract-method
    """Serializador de um TestOutcome"""

    __test__ = False  # não é uma classe de teste

    def to_representation(self, instance):
        """
        Converte o resultado em uma representação serializável
        """
        return instance.to_dict()


class MultiPatternReportSerializer(serializers.Serializer):  # pylint: disable=abstract-method
    """Serializador do relatório de múltiplos padrões: linhas por padrão e resumo BH"""

    def to_representation(self, instance):
        return instance.to_dict()


class SimulationSerializer(serializers.Serializer):  # pylint: disable=abstract-method
    """Serializador de uma simulação: os trials e os parâmetros sorteados"""

    trial_set = TrialSetField()

    def to_representation(self, instance):
        trial_set, params = instance
        return {"trial_set": trial_set_to_dict(trial_set), "parameters": params.to_dict()}
