from dataclasses import dataclass
from typing import Tuple

from src.errors import InvalidPattern

BLOCK_TAGS = ("EAM", "SAT")

ABLATION_PATTERNS: Tuple[str, ...] = (
    "SAT-EAM",
    "EAM-SAT",
    "SAT-EAM-EAM",
    "EAM-SAT-EAM",
    "EAM-EAM-SAT",
)
DEFAULT_PATTERN = "EAM-EAM-SAT"


@dataclass(frozen=True)
class HybridPattern:
    blocks: Tuple[str, ...]

    def __post_init__(self):
        if not self.blocks:
            raise InvalidPattern("hybrid pattern is empty")
        unknown = [b for b in self.blocks if b not in BLOCK_TAGS]
        if unknown:
            raise InvalidPattern(f"unknown block tags {unknown}; allowed: {BLOCK_TAGS}")

    @classmethod
    def parse(cls, text: str) -> "HybridPattern":
        if not isinstance(text, str) or not text.strip():
            raise InvalidPattern("hybrid pattern is empty")
        return cls(tuple(part.strip().upper() for part in text.strip().split("-")))

    def __str__(self) -> str:
        return "-".join(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    @property
    def uses_sat(self) -> bool:
        return "SAT" in self.blocks
