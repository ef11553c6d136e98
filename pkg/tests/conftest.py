import pytest
from loguru import logger

from tests.helpers import CORPUS, make_spec

QUARTIC_ANCHORS = [[0, 1], [0, "0+1j"], [0, "-0.6-0.8j"]]


@pytest.fixture
def ball_spec():
    """Unit ball in C^2 with a small sample."""
    return make_spec("abs2(z1) + abs2(z2) - 1", sampling={"count": 48, "box_radius": 1.5})


@pytest.fixture
def cylinder_spec():
    """Levi-flat cylinder |z2| < 1 with a small sample."""
    return make_spec("abs2(z2) - 1", sampling={"count": 48})


@pytest.fixture
def quartic_spec():
    """|z1|^4 + |z2|^2 < 1 with anchors on the weak circle z1 = 0."""
    return make_spec(
        "abs2(z1)^2 + abs2(z2) - 1",
        sampling={"count": 48, "box_radius": 1.5, "anchors": QUARTIC_ANCHORS},
    )


@pytest.fixture
def quartic_conformal_spec():
    """The quartic domain with conformal basis [|z1|^2]."""
    return make_spec(
        "abs2(z1)^2 + abs2(z2) - 1",
        sampling={"count": 48, "box_radius": 1.5, "anchors": QUARTIC_ANCHORS},
        conformal_basis=["abs2(z1)"],
        optimizer={"budget": 120, "restarts": 2},
    )


@pytest.fixture
def corpus_dir():
    """Directory of shipped example configs."""
    return CORPUS


@pytest.fixture
def ball_config(tmp_path):
    """Ball config written to a temporary file."""
    path = tmp_path / "ball.toml"
    path.write_text(
        'n = 2\nrho = "abs2(z1) + abs2(z2) - 1"\n\n[sampling]\ncount = 32\nbox_radius = 1.5\n'
    )
    return path


@pytest.fixture
def log_messages():
    """Messages logged through loguru while the test runs."""
    messages = []
    handler_id = logger.add(
        lambda message: messages.append(message.record["message"]), level="DEBUG"
    )
    yield messages
    logger.remove(handler_id)
