import functools

import pytest

from polystab.baseflow import solve_base_flow
from polystab.config import Grid, ModelParams
from polystab.lincoeff import build_coefficients

MAIN = dict(Re=1.0, W=1.0, Gr=1.0, Pr=1.0, A_r=1.0, A_m=1.0, beta=0.5, k_phen=0.5,
            sigma_m=1.0, b_m=1.0, E_A_bar=1.0, theta_bar=1.0, J_plus=2.0, J_minus=1.0,
            lambda_hat=1.0, A_hat=1.0, omega=1.0)

# pressure drop off, equal wall currents, equal wall temperatures
REST_CHANGES = dict(A_hat=0.0, theta_bar=0.0, J_plus=1.0, J_minus=1.0)


def main_params(**changes) -> ModelParams:
    return ModelParams(**MAIN).replace(**changes)


def rest_params(**changes) -> ModelParams:
    return main_params(**{**REST_CHANGES, **changes})


@functools.lru_cache(maxsize=None)
def flow_for(params: ModelParams, n: int):
    return solve_base_flow(params, Grid(n))


@functools.lru_cache(maxsize=None)
def coeffs_for(params: ModelParams, n: int):
    return build_coefficients(flow_for(params, n))


@pytest.fixture(scope="session")
def main_case():
    return main_params()


@pytest.fixture(scope="session")
def rest_case():
    return rest_params()
