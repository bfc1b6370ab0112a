# -*- coding: utf-8 -*-
"""
引导方式配置汇总
"""
from dataclasses import dataclass, field

from app.errors import ConfigError
from .product import ProductConfig
from .rm import RMShapingConfig
from .symloss import SymLossConfig

GUIDANCE_MODES = ("none", "product", "symloss", "rm")


@dataclass(frozen=True)
class GuidanceConfig:
    mode: str = "none"
    product: ProductConfig = field(default_factory=ProductConfig)
    symloss: SymLossConfig = field(default_factory=SymLossConfig)
    rm: RMShapingConfig = field(default_factory=RMShapingConfig)

    @property
    def needs_masks(self) -> bool:
        return self.mode != "none"

    def validate(self) -> "GuidanceConfig":
        if self.mode not in GUIDANCE_MODES:
            raise ConfigError(f"未知引导方式: {self.mode}，可选 {', '.join(GUIDANCE_MODES)}")
        if self.mode == "product":
            self.product.validate()
        elif self.mode == "symloss":
            self.symloss.validate()
        elif self.mode == "rm":
            self.rm.validate()
        return self
