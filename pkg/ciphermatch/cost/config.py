from __future__ import annotations

import json
from enum import Enum
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ciphermatch.core.errors import FormatError, MissingInputError
from ciphermatch.models.workload import GIB
from ciphermatch.utils.logger import logger
from ciphermatch.utils.settings import settings

COST_CONFIG_FILE = "cost_config.json"


class EnergyBasis(str, Enum):
    PER_CHANNEL = "per_channel"
    PER_KB = "per_kb"
    PER_PAGE = "per_page"


class Energy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    value_nj: float = Field(ge=0)
    basis: EnergyBasis

    def per_channel(self, page_bytes: int) -> float:
        """Energy of one operation on one channel's page, in nJ."""
        if self.basis is EnergyBasis.PER_KB:
            return self.value_nj * page_bytes / 1024
        return self.value_nj


class NandTimingParams(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    t_read: float = Field(default=22_500.0, ge=0)
    t_xor: float = Field(default=30.0, ge=0)
    t_latch_transfer: float = Field(default=20.0, ge=0)
    t_and_or: float = Field(default=20.0, ge=0)
    t_dma: float = Field(default=3_300.0, ge=0)
    t_transpose: float = Field(default=13_600.0, ge=0)
    t_index_gen: float = Field(default=3_420.0, ge=0)

    e_read: Energy = Energy(value_nj=20_500.0, basis=EnergyBasis.PER_CHANNEL)
    e_xor: Energy = Energy(value_nj=20.0, basis=EnergyBasis.PER_KB)
    e_latch_transfer: Energy = Energy(value_nj=10.0, basis=EnergyBasis.PER_KB)
    e_and_or: Energy = Energy(value_nj=10.0, basis=EnergyBasis.PER_KB)
    e_dma: Energy = Energy(value_nj=7_656.0, basis=EnergyBasis.PER_CHANNEL)
    e_index_gen: Energy = Energy(value_nj=180.0, basis=EnergyBasis.PER_PAGE)


class SsdTopology(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    channels: int = Field(default=8, gt=0)
    dies_per_channel: int = Field(default=8, gt=0)
    planes_per_die: int = Field(default=2, gt=0)
    blocks_per_plane: int = Field(default=2048, gt=0)
    wordlines_per_block: int = Field(default=196, gt=0)
    page_bytes: int = Field(default=4096, gt=0)
    channel_bw: float = Field(default=1.2e9, gt=0)
    external_io_bw: float = Field(default=7.0e9, gt=0)

    @property
    def planes(self) -> int:
        return self.channels * self.dies_per_channel * self.planes_per_die

    @property
    def parallel_bitlines(self) -> int:
        return self.planes * self.page_bytes * 8


class DramConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    capacity_bytes: int = Field(default=32 * GIB, gt=0)
    channels: int = Field(default=4, gt=0)
    ranks: int = Field(default=1, gt=0)
    banks: int = Field(default=16, gt=0)
    # banks computing concurrently per rank, bounded by power delivery
    active_banks: int = Field(default=1, gt=0)
    row_bits: int = Field(default=65_536, gt=0)
    bandwidth: float = Field(default=19.2e9, gt=0)
    t_bbop: float = Field(default=49.0, ge=0)
    e_bbop: float = Field(default=0.864, ge=0)
    # average device power over the compute window (DDR4 power model), charged on top of e_bbop
    background_power_w: float = Field(default=21.0, ge=0)
    bbops_per_bit: int = Field(default=32, gt=0)

    @property
    def parallel_bits(self) -> int:
        return self.channels * self.ranks * min(self.active_banks, self.banks) * self.row_bits


def _ssd_internal_dram() -> DramConfig:
    return DramConfig(capacity_bytes=2 * GIB, channels=1, ranks=1, banks=8, bandwidth=14.9e9, background_power_w=5.0)


class CpuConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # 32-bit ciphertext word additions per second, end to end through the HE library
    add_throughput: float = Field(default=2.0e7, gt=0)
    power_w: float = Field(default=105.0, ge=0)


class TransferEnergy(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    storage_read_nj_per_byte: float = Field(default=0.6, ge=0)
    io_nj_per_byte: float = Field(default=0.4, ge=0)
    dram_nj_per_byte: float = Field(default=0.16, ge=0)


class CostConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    nand: NandTimingParams = NandTimingParams()
    ssd: SsdTopology = SsdTopology()
    dram: DramConfig = DramConfig()
    ssd_dram: DramConfig = Field(default_factory=_ssd_internal_dram)
    cpu: CpuConfig = CpuConfig()
    transfer: TransferEnergy = TransferEnergy()
    word_bits: int = Field(default=32, gt=0)
    query_ciphertext_bytes: int = Field(default=8192, ge=0)


def load_cost_config(path: Path | None = None) -> CostConfig:
    """
    Explicit path first, then <config_dir>/cost_config.json, then the
    built-in defaults.
    """
    if path is None:
        candidate = settings.config_dir / COST_CONFIG_FILE
        if not candidate.exists():
            logger.debug(f"No {COST_CONFIG_FILE} in {settings.config_dir}, using built-in cost parameters")
            return CostConfig()
        path = candidate

    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise MissingInputError(f"cost config not found: {path}") from e
    except json.JSONDecodeError as e:
        raise FormatError(f"cost config {path} is not valid JSON: {e}") from e

    try:
        config = CostConfig.model_validate(raw)
    except ValidationError as e:
        raise FormatError(f"cost config {path} failed validation: {e}") from e

    logger.debug(f"Loaded cost parameters from {path}")
    return config
