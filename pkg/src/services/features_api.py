from typing import Optional

import numpy as np

from src.errors import ProviderUnavailable
from src.services.http_client import FeatureHttpClient


class FeaturesAPI:
    def __init__(self, client: Optional[FeatureHttpClient] = None):
        self.client = client or FeatureHttpClient()

    def fetch(self, sequence_id: str, n_frames: int, prompt: str) -> np.ndarray:
        resp = self.client.request(
            "POST",
            "/features",
            json={"sequence_id": sequence_id, "n_frames": n_frames, "prompt": prompt},
        )
        if resp.status_code != 200:
            raise ProviderUnavailable(f"feature service answered {resp.status_code} for {sequence_id}")
        try:
            features = np.asarray(resp.json()["features"], dtype=np.float32)
        except (ValueError, KeyError, TypeError) as e:
            raise ProviderUnavailable(f"malformed feature payload for {sequence_id}: {e}") from e
        if features.ndim != 2 or features.shape[0] < n_frames:
            raise ProviderUnavailable(
                f"feature service returned shape {features.shape} for {sequence_id}, need {n_frames} rows"
            )
        return features[:n_frames]
