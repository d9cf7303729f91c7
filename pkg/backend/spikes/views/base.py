"""View base das rotas da API: validação do corpo e tradução dos erros da biblioteca"""

import logging

from rest_framework import status
from rest_framework.permissions import AllowAny
from rest_framework.response import Response
from rest_framework.views import APIView

from ..exceptions import CapacityError, DegenerateStatisticError, ParameterError, SpikeDataError

logger = logging.getLogger(__name__)


class LibraryAPIView(APIView):
    """
    APIView que valida o corpo com `serializer_class` e executa `compute`.

    Erros de entrada e de parâmetro voltam como 400, estatísticas indefinidas como 422 com a
    sinalização correspondente.
    """

    permission_classes = [AllowAny]
    serializer_class = None

    def compute(self, data: dict):
        """Executa a operação sobre os dados validados e retorna o corpo da resposta."""
        raise NotImplementedError

    def post(self, request):
        """
        Lida com a solicitação POST.

        Retornos:
        -------
        - 200 com o resultado em JSON
        - 400 com {"error": ...} se o corpo ou os parâmetros forem inválidos
        - 422 com {"error": ..., "flag": ...} se a estatística for indefinida
        """
        serializer = self.serializer_class(data=request.data)  # pylint: disable=not-callable
        if not serializer.is_valid():
            return Response({"error": serializer.errors}, status=status.HTTP_400_BAD_REQUEST)

        try:
            body = self.compute(serializer.validated_data)
        except DegenerateStatisticError as e:
            logger.warning("Estatística indefinida: %s", str(e))
            return Response(
                {"error": str(e), "flag": e.flag}, status=status.HTTP_422_UNPROCESSABLE_ENTITY
            )
        except (SpikeDataError, ParameterError, CapacityError) as e:
            logger.error("Requisição inválida: %s", str(e))
            return Response({"error": str(e)}, status=status.HTTP_400_BAD_REQUEST)

        return Response(body, status=status.HTTP_200_OK)
