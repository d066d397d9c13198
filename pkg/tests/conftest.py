import pytest

from boostdyn import ConverterParams


@pytest.fixture
def line_params() -> ConverterParams:
    """Bench converter used for the input-voltage experiments."""
    return ConverterParams(
        v_i=3.3, l=1e-3, r_l=1.5, c=42e-6, r_c=1.3, r_m=0.9,
        v_d=0.5, r_0=92.0, d=0.49, f_sw=1e4,
    )


@pytest.fixture
def line_params_measured() -> ConverterParams:
    """Same converter with LCR-bridge measured component values."""
    return ConverterParams(
        v_i=3.3, l=1e-3, r_l=1.4, c=42e-6, r_c=1.0, r_m=0.8,
        v_d=0.4, r_0=95.0, d=0.50, f_sw=1e4,
    )


@pytest.fixture
def load_params() -> ConverterParams:
    """Bench converter used for the load-step experiments (pre-step load)."""
    return ConverterParams(
        v_i=5.0, l=1e-3, r_l=1.4, c=43e-6, r_c=1.0, r_m=0.8,
        v_d=0.4, r_0=10.0, d=0.50, f_sw=1e4,
    )


@pytest.fixture
def fast_params() -> ConverterParams:
    """Small, quickly settling converter for oracle and CLI round trips."""
    return ConverterParams(
        v_i=3.0, l=1e-4, r_l=0.5, c=1e-5, r_c=0.2, r_m=0.4,
        v_d=0.3, r_0=20.0, d=0.5, f_sw=1e5,
    )
