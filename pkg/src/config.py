import copy
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Tuple

from omegaconf import OmegaConf
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings

from src.errors import ConfigError

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process settings."""

    log_level: str = Field("INFO", description="Level of logging")
    log_dir: str = Field("logs", description="Directory of engine.log")

    # Storage
    data_dir: str = Field("data", description="Default dataset directory")
    runs_dir: str = Field("runs", description="Default directory for training/eval outputs")

    # Remote vision-feature service
    feature_service_url: Optional[str] = Field(
        default=None,
        description="Base URL of a remote vision-feature service"
    )
    feature_service_timeout: float = Field(15.0, description="HTTP timeout, seconds")

    show_progress: bool = Field(True, description="tqdm progress bars")

    class Config:
        env_file = ".env"
        case_sensitive = False


settings = Settings()


EgomotionMode = Literal["homography", "se3", "constant-last", "none"]
ScheduleKind = Literal["sqrt", "linear"]
ProviderKind = Literal["synthetic", "file", "http"]

EGOMOTION_MODES: Tuple[str, ...] = ("homography", "se3", "constant-last", "none")
PRESETS = ("desk", "paper")


# ----------------- SECTIONS -----------------
class DataConfig(BaseModel):
    root: str = "data"
    n_frames: int = 20
    split_ratio: float = 0.6
    n_train: int = 512
    n_test: int = 128
    train_seed: int = 1
    test_seed: int = 2
    mode_mix: Dict[str, float] = Field(
        default_factory=lambda: {"head_leads": 0.5, "hand_leads": 0.3, "neutral": 0.2}
    )
    profile: Literal["min_jerk", "linear"] = "min_jerk"
    image_width: int = 640
    image_height: int = 480
    focal: float = 500.0

    @field_validator("split_ratio")
    @classmethod
    def _ratio_open_interval(cls, v: float) -> float:
        if not 0.0 < v < 1.0:
            raise ValueError(f"split_ratio must lie in (0, 1), got {v}")
        return v

    @field_validator("mode_mix")
    @classmethod
    def _known_modes(cls, v: Dict[str, float]) -> Dict[str, float]:
        unknown = set(v) - {"head_leads", "hand_leads", "neutral"}
        if unknown:
            raise ValueError(f"unknown synergy modes in mode_mix: {sorted(unknown)}")
        if any(w < 0 for w in v.values()) or sum(v.values()) <= 0:
            raise ValueError("mode_mix weights must be nonnegative with a positive sum")
        return v

    @model_validator(mode="after")
    def _split_leaves_two_each(self) -> "DataConfig":
        from src.data.sequence import past_count
        from src.errors import DegenerateSplit

        try:
            n_past = past_count(self.n_frames, self.split_ratio)
        except DegenerateSplit as e:
            raise ValueError(str(e)) from e
        if n_past < 2 or self.n_frames - n_past < 2:
            raise ValueError(f"split leaves N_p={n_past}, N_f={self.n_frames - n_past}; both must be ≥ 2")
        if self.n_train < 1 or self.n_test < 1:
            raise ValueError("n_train and n_test must be positive")
        return self

    @property
    def n_past(self) -> int:
        from src.data.sequence import past_count

        return past_count(self.n_frames, self.split_ratio)

    @property
    def n_future(self) -> int:
        return self.n_frames - self.n_past


class EAMConfig(BaseModel):
    d_state: int = 16
    d_conv: int = 2
    expand: int = 1

    @field_validator("d_state", "d_conv", "expand")
    @classmethod
    def _positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("EAM dimensions must be positive")
        return v


class SATConfig(BaseModel):
    n_head: int = 4
    d_ffn: int = 256  # 2·f at the desk width


class ModelConfig(BaseModel):
    f: int = 128
    x: int = 32
    voxel_dims: Tuple[int, int, int] = (20, 20, 20)
    voxel_resolution: float = 0.05
    voxel_hidden: int = 64
    pattern: str = "EAM-EAM-SAT"
    vm_layers: int = 1
    eam: EAMConfig = Field(default_factory=EAMConfig)
    sat: SATConfig = Field(default_factory=SATConfig)

    @field_validator("voxel_dims")
    @classmethod
    def _positive_dims(cls, v: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if any(d < 1 for d in v):
            raise ValueError(f"voxel dims must be positive, got {v}")
        return v

    @field_validator("pattern")
    @classmethod
    def _valid_pattern(cls, v: str) -> str:
        from src.denoisers.pattern import HybridPattern
        from src.errors import InvalidPattern

        try:
            return str(HybridPattern.parse(v))
        except InvalidPattern as e:
            raise ValueError(str(e)) from e

    @model_validator(mode="after")
    def _heads_divide_f(self) -> "ModelConfig":
        if self.f % self.sat.n_head != 0:
            raise ValueError(f"f={self.f} is not divisible by n_head={self.sat.n_head}")
        if self.voxel_resolution <= 0:
            raise ValueError("voxel_resolution must be positive")
        return self


class ScheduleConfig(BaseModel):
    kind: ScheduleKind = "sqrt"
    T: int = 1000
    k_ego: int = 1
    k_htp: int = 100

    @model_validator(mode="after")
    def _steps_within_T(self) -> "ScheduleConfig":
        if self.T < 1:
            raise ValueError(f"T must be ≥ 1, got {self.T}")
        for name in ("k_ego", "k_htp"):
            k = getattr(self, name)
            if not 1 <= k <= self.T:
                raise ValueError(f"{name}={k} must satisfy 1 ≤ K ≤ T={self.T}")
        return self


class LossWeights(BaseModel):
    vlb_ego: float = 1.0
    vlb_htp: float = 1.0
    dis: float = 1.0
    reg: float = 1.0
    angle: float = 1.0

    @model_validator(mode="after")
    def _nonnegative(self) -> "LossWeights":
        if any(w < 0 for w in self.model_dump().values()):
            raise ValueError("loss weights must be nonnegative")
        return self


class TrainConfig(BaseModel):
    lr: float = 5e-4
    weight_decay: float = 0.01
    epochs: int = 200
    batch_size: int = 16
    seed: int = 0
    grad_clip: float = 1.0
    checkpoint_every: int = 10
    sanity_epochs: int = 5
    dtype: Literal["float32", "float64"] = "float32"


class ModalityConfig(BaseModel):
    """Input-modality toggles; waypoints are always on."""

    waypoints: bool = True
    images: bool = True
    text: bool = True
    point_clouds: bool = True

    @field_validator("waypoints")
    @classmethod
    def _waypoints_required(cls, v: bool) -> bool:
        if not v:
            raise ValueError("the waypoint modality cannot be disabled")
        return v


class ProviderConfig(BaseModel):
    kind: ProviderKind = "synthetic"
    seed: int = 0
    path: Optional[str] = None
    prompt: str = "hand"


class EvalConfig(BaseModel):
    seed: int = 0
    plots: int = 8
    predictors: Tuple[str, ...] = ("model", "cvh", "constant")


class RunConfig(BaseModel):
    preset: str = "desk"
    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    loss_weights: LossWeights = Field(default_factory=LossWeights)
    train: TrainConfig = Field(default_factory=TrainConfig)
    modalities: ModalityConfig = Field(default_factory=ModalityConfig)
    egomotion_mode: EgomotionMode = "homography"
    provider: ProviderConfig = Field(default_factory=ProviderConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)


# ----------------- PRESETS -----------------
PRESET_OVERLAYS: Dict[str, Dict[str, Any]] = {
    "desk": {},
    "paper": {
        "model": {
            "f": 1024,
            "x": 256,
            "voxel_hidden": 64,
            "pattern": "EAM-EAM-SAT",
            "eam": {"d_state": 16, "d_conv": 2, "expand": 1},
            "sat": {"n_head": 4, "d_ffn": 2048},
        },
        "schedule": {"kind": "sqrt", "T": 1000, "k_ego": 1, "k_htp": 100},
        "train": {"lr": 5e-5, "epochs": 1000},
    },
}


def _deep_merge(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    merged = OmegaConf.merge(OmegaConf.create(base), OmegaConf.create(overlay))
    return OmegaConf.to_container(merged, resolve=True)


def build_config(overlay: Optional[Dict[str, Any]] = None, preset: Optional[str] = None) -> RunConfig:
    """Preset base, then the overlay tree on top; validates the result."""
    overlay = copy.deepcopy(overlay or {})
    name = preset or overlay.get("preset") or "desk"
    if name not in PRESET_OVERLAYS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {PRESETS}")
    tree = _deep_merge(RunConfig().model_dump(mode="json"), PRESET_OVERLAYS[name])
    tree = _deep_merge(tree, overlay)
    tree["preset"] = name
    try:
        return RunConfig.model_validate(tree)
    except ValidationError as e:
        raise ConfigError(f"invalid run configuration:\n{e}") from e


def load_run_config(
    path: Optional[Path] = None,
    preset: Optional[str] = None,
    seed: Optional[int] = None,
) -> RunConfig:
    """
    Reads a YAML run configuration. A top-level `preset` key selects the base
    preset; CLI `--preset` and `--seed` overlay last.
    """
    overlay: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            overlay = OmegaConf.to_container(OmegaConf.load(path), resolve=True) or {}
        except Exception as e:
            raise ConfigError(f"cannot parse config {path}: {e}") from e
        if not isinstance(overlay, dict):
            raise ConfigError(f"config {path} must hold a mapping at the top level")
    if seed is not None:
        overlay = _deep_merge(overlay, {"train": {"seed": seed}})
    cfg = build_config(overlay, preset=preset)
    logger.info("Config loaded | path=%s | preset=%s | hash=%s", path, cfg.preset, config_hash(cfg)[:12])
    return cfg


def with_overrides(cfg: RunConfig, overlay: Dict[str, Any]) -> RunConfig:
    """Ablation variants: the same overlay semantics applied to a validated config."""
    tree = _deep_merge(cfg.model_dump(mode="json"), overlay)
    try:
        return RunConfig.model_validate(tree)
    except ValidationError as e:
        raise ConfigError(f"invalid configuration override {overlay}:\n{e}") from e


def config_hash(cfg: RunConfig) -> str:
    """sha256 of the canonical JSON of everything that shapes the model."""
    relevant = {
        "model": cfg.model.model_dump(mode="json"),
        "schedule": cfg.schedule.model_dump(mode="json"),
        "modalities": cfg.modalities.model_dump(mode="json"),
        "egomotion_mode": cfg.egomotion_mode,
        "data": cfg.data.model_dump(
            mode="json", include={"n_frames", "split_ratio", "image_width", "image_height", "focal"}
        ),
    }
    canonical = json.dumps(relevant, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
