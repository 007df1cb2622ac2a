import zlib
from typing import Dict, Optional, Protocol

import numpy as np

from src.data.examples import Example
from src.diffusion.model import TwinModel
from src.eval.baselines import constant_position_baseline, cvh_baseline


class Predictor(Protocol):
    name: str

    def predict(self, example: Example) -> np.ndarray:
        ...


class OraclePredictor:
    """Returns the ground-truth future."""

    name = "oracle"

    def predict(self, example: Example) -> np.ndarray:
        return example.future_waypoints.copy()


class CVHPredictor:
    name = "cvh"

    def predict(self, example: Example) -> np.ndarray:
        return cvh_baseline(example.past_waypoints, example.n_future)


class ConstantPositionPredictor:
    name = "constant"

    def predict(self, example: Example) -> np.ndarray:
        return constant_position_baseline(example.past_waypoints, example.n_future)


class ModelPredictor:
    """Trained twin model; the sampling seed depends on (seed, sequence id) only."""

    def __init__(self, model: TwinModel, seed: int = 0, name: str = "model"):
        self.model = model
        self.seed = seed
        self.name = name

    def sequence_seed(self, sequence_id: str) -> int:
        return int(np.random.SeedSequence([self.seed, zlib.crc32(sequence_id.encode("utf-8"))]).generate_state(1)[0])

    def predict(self, example: Example) -> np.ndarray:
        return self.model.predict(example, seed=self.sequence_seed(example.id))


BASELINES: Dict[str, type] = {
    "oracle": OraclePredictor,
    "cvh": CVHPredictor,
    "constant": ConstantPositionPredictor,
}


def make_predictor(name: str, model: Optional[TwinModel] = None, seed: int = 0) -> Predictor:
    if name == "model":
        if model is None:
            raise ValueError("the model predictor needs a trained model")
        return ModelPredictor(model, seed=seed)
    if name not in BASELINES:
        raise ValueError(f"unknown predictor {name!r}; expected model or one of {sorted(BASELINES)}")
    return BASELINES[name]()
