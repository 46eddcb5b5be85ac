"""Layer roles used to partition a reference visualization."""

import enum


class LayerRole(enum.Enum):
    DATA_DRIVEN = "data-driven"
    TEXT = "text"
    DECORATIVE = "decorative"
    CONFIGURATION = "configuration"

    @classmethod
    def from_string(cls, value: str) -> "LayerRole":
        for role in cls:
            if role.value == value:
                return role
        raise ValueError(f"unknown layer role {value!r}")
