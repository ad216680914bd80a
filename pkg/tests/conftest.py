import pytest

import zsgdual as zd


@pytest.fixture(scope="session")
def two_period():
    return zd.build_two_period_matrix_game()


@pytest.fixture(scope="session")
def waste3():
    return zd.build_waste_inspection_game(zd.WasteGameConfig(n_sites=3))
