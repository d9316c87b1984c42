"""
API endpoint tests for the tnnflag HTTP surface.
"""

import pytest
from fastapi.testclient import TestClient
from unittest.mock import patch

from tnnflag.config import settings
from tnnflag.errors import OutsideDomainError
from tnnflag.main import app

PREFIX = settings.api_prefix


@pytest.fixture
def client():
    return TestClient(app)


class TestHealthEndpoints:
    """Service info and liveness."""

    def test_root_endpoint(self, client):
        """The root reports name, version and status."""
        response = client.get('/')
        assert response.status_code == 200
        data = response.json()
        assert data['status'] == 'online'
        assert data['name'] == settings.app_name
        assert 'version' in data

    def test_health_live(self, client):
        """Liveness check."""
        response = client.get(f'{PREFIX}/health/live')
        assert response.status_code == 200
        assert response.json()['status'] == 'alive'


class TestCellEndpoints:
    """Cells, poset, necklace and Le-diagram."""

    def test_cells(self, client):
        """Bound(2, 4) has 33 cells."""
        response = client.get(f'{PREFIX}/cells', params={'n': 4, 'k': 2})
        assert response.status_code == 200
        data = response.json()
        assert data['count'] == 33
        assert len(data['cells']) == 33
        assert data['cells'] == sorted(data['cells'], key=lambda c: [int(x) for x in c.strip('[]').split(',')])

    def test_poset(self, client):
        """Q_J of Gr(1, 3) is graded, thin and Eulerian once a minimum is adjoined."""
        response = client.get(f'{PREFIX}/poset', params={'n': 3, 'k': 1})
        assert response.status_code == 200
        data = response.json()
        assert data['graded'] and data['thin'] and data['eulerian']
        size = len(data['elements'])
        assert all(0 <= i < size and 0 <= j < size for i, j in data['covers'])

    def test_necklace(self, client):
        """Necklace of the running cell [2,4,5,7]."""
        response = client.get(f'{PREFIX}/necklace', params={'h': '[2,4,5,7]'})
        assert response.status_code == 200
        data = response.json()
        assert data['necklace'] == [[1, 3], [2, 3], [3, 4], [4, 5]]
        assert data['k'] == 2

    def test_lediagram(self, client):
        """Le-diagram of (e, s2) in Gr(2, 4) comes with an ASCII rendering."""
        response = client.get(f'{PREFIX}/lediagram', params={'v': 'e', 'w': 's2', 'k': 2, 'n': 4})
        assert response.status_code == 200
        data = response.json()
        assert data['v'] == '[1,2,3,4]'
        assert data['w'] == '[1,3,2,4]'
        assert isinstance(data['ascii'], str)


class TestMatrixEndpoints:
    """Marsh-Rietsch matrices and Snider images."""

    def test_mr(self, client):
        """g_{s1, s2s1s4s3s2} has one variable per J+ letter."""
        response = client.get(f'{PREFIX}/mr', params={'v': 's1', 'w': 's2s1s4s3s2', 'n': 5})
        assert response.status_code == 200
        data = response.json()
        assert data['word'] == [2, 1, 4, 3, 2]
        assert sorted(data['variables']) == ['t1', 't3', 't4', 't5']
        assert data['matrix']['rows'] == 5

    def test_snider(self, client):
        """The running cell seen from the chart of s3s2 is located at its own label."""
        params = {'u': 's3s2', 'v': 's2', 'w': 's2s1s3s2', 'k': 2, 'n': 4}
        response = client.get(f'{PREFIX}/snider', params=params)
        assert response.status_code == 200
        data = response.json()
        assert data['g'] == '[2,4,5,7]'
        assert data['located'] == '[2,4,5,7]'
        assert len(data['truncated_minors']) == 4


class TestErrorHandling:
    """Library errors become ErrorResponse bodies."""

    def test_n_above_limit(self, client):
        """n above API_MAX_N is rejected with 422."""
        with patch.object(settings, 'api_max_n', 3):
            response = client.get(f'{PREFIX}/cells', params={'n': 4, 'k': 2})
        assert response.status_code == 422
        data = response.json()
        assert data['error'] is True
        assert data['details'][0]['code'] == 'INVALID_INPUT'

    def test_malformed_permutation(self, client):
        """A repeated image is invalid input."""
        response = client.get(f'{PREFIX}/mr', params={'v': '[1,1,2]', 'w': '[1,2,3]'})
        assert response.status_code == 422

    def test_k_out_of_range(self, client):
        """k must lie in [1, n-1]."""
        response = client.get(f'{PREFIX}/poset', params={'n': 4, 'k': 4})
        assert response.status_code == 422

    def test_domain_error_is_400(self, client):
        """Errors other than invalid input map to 400."""
        with patch('tnnflag.main.necklace_report', side_effect=OutsideDomainError('outside')):
            response = client.get(f'{PREFIX}/necklace', params={'h': '[2,4,5,7]'})
        assert response.status_code == 400
        assert response.json()['details'][0]['code'] == 'OUTSIDE_DOMAIN'

    def test_missing_parameter(self, client):
        """FastAPI validation rejects a missing query parameter."""
        response = client.get(f'{PREFIX}/cells', params={'n': 4})
        assert response.status_code == 422


class TestRequestHeaders:
    """Request tracing and security headers."""

    def test_request_id_generated(self, client):
        """A request ID is generated when none is sent."""
        response = client.get(f'{PREFIX}/health/live')
        assert 'X-Request-ID' in response.headers
        assert 'X-Response-Time-Ms' in response.headers

    def test_request_id_passed_through(self, client):
        """A provided request ID is echoed back, also in error bodies."""
        response = client.get(f'{PREFIX}/poset', params={'n': 4, 'k': 4}, headers={'X-Request-ID': 'custom-123'})
        assert response.headers['X-Request-ID'] == 'custom-123'
        assert response.json()['request_id'] == 'custom-123'

    def test_security_headers(self, client):
        """Security headers are set on every response."""
        response = client.get('/')
        assert response.headers['X-Content-Type-Options'] == 'nosniff'
        assert response.headers['X-Frame-Options'] == 'DENY'


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
