import numpy as np
import pytest

from core.rng import PARAMS_STREAM, stream
from schemas.dataset_schema import ManifestRecord
from schemas.model_schema import TrainConfig, WrnConfig
from schemas.signal_schema import CLASS_ORDER, SignalClass
from schemas.spectro_schema import SpectroConfig
from services import classifier
from services.dataset import item_seed
from services.sigsim import sample_params, simulate
from services.spectro import classifier_input

# Published confusion counts, rows actual / columns predicted, alphabetical classes
PUBLISHED_CONFUSION = np.array([
    [330, 0, 0, 55, 0, 0, 0],
    [0, 335, 10, 5, 5, 0, 0],
    [0, 0, 340, 7, 1, 0, 0],
    [1, 0, 0, 366, 1, 0, 0],
    [2, 2, 1, 24, 356, 0, 0],
    [0, 0, 0, 1, 0, 321, 0],
    [0, 0, 0, 8, 2, 0, 322],
])

# precision, recall, F1 per class for the counts above
PUBLISHED_SCORES = {
    SignalClass.brightpixel: (0.991, 0.857, 0.919),
    SignalClass.narrowband: (0.994, 0.944, 0.968),
    SignalClass.narrowbanddrd: (0.969, 0.977, 0.973),
    SignalClass.noise: (0.785, 0.995, 0.877),
    SignalClass.squarepulsednarrowband: (0.975, 0.925, 0.949),
    SignalClass.squiggle: (1.000, 0.997, 0.998),
    SignalClass.squigglesquarepulsednarrowband: (1.000, 0.970, 0.984),
}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_record(signal_class: SignalClass, index: int, split: str = "train") -> ManifestRecord:
    """A manifest record with real parameters and no file behind it."""
    params = sample_params(signal_class, stream(index, PARAMS_STREAM), seed=index)
    return ManifestRecord(
        id=f"{split}_{signal_class.value}_{index:06d}",
        signal_class=signal_class,
        params=params,
        file=f"data/{split}_{signal_class.value}_{index:06d}.iq8",
        split=split,
    )


@pytest.fixture
def fileless_manifest():
    """Ten file-less training records per class."""
    return [make_record(c, i) for c in CLASS_ORDER for i in range(10)]


@pytest.fixture
def published_confusion():
    return PUBLISHED_CONFUSION.copy()


@pytest.fixture
def published_scores():
    return dict(PUBLISHED_SCORES)


@pytest.fixture
def record_factory():
    return make_record


def simulated_inputs(classes, per_class, split, amplitudes, height, width, master_seed=0, group=0):
    """In-memory classifier inputs; ``amplitudes`` is a value or a (low, high) range drawn per item."""
    draw = np.random.default_rng(master_seed + 1000 * group)
    cfg = SpectroConfig()
    features, labels = [], []
    for signal_class in classes:
        for index in range(per_class):
            amplitude = draw.uniform(*amplitudes) if isinstance(amplitudes, tuple) else amplitudes
            seed = item_seed(master_seed, split, signal_class, index, group=group)
            _, series = simulate(signal_class, seed, amplitude=amplitude)
            features.append(classifier_input(series, cfg, height, width))
            labels.append(signal_class.code)
    return np.stack(features), np.array(labels, dtype=np.int64)


@pytest.fixture
def inputs_factory():
    return simulated_inputs


@pytest.fixture(scope="session")
def desk_model():
    """WRN-10-1 trained on 500 / 100 simulations per class at A/13 in [0.1, 0.4]."""
    x_train, y_train = simulated_inputs(CLASS_ORDER, 500, "train", (0.1, 0.4), 96, 128)
    x_val, y_val = simulated_inputs(CLASS_ORDER, 100, "test", (0.1, 0.4), 96, 128)
    wrn_cfg = WrnConfig.preset("wrn-10-1", input_h=96, input_w=128)
    model, history = classifier.fit(x_train, y_train, x_val, y_val, wrn_cfg, TrainConfig(epochs=20, seed=0))
    return model, history
