"""
regimerisk.workflows.synthetic
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Synthetic weekly market with a calm regime and one high-variance, high-correlation block.

Returns are r_t = mu + sqrt(h_t) z_t with Gaussian innovations equicorrelated at rho_calm (or
rho_high inside the block). Each log-variance is a stationary AR(1) around its calm level,
shifted up by 2 log(vol_ratio) inside the block.

Classes:
    - SyntheticMarketSpec: Generator settings.
    - SyntheticMarket: Prices, metadata and the true variances and regimes.

Functions:
    - simulate_market: Generate a market.
    - write_market: Write prices, metadata, truth and a ready-to-run configuration.
"""
import json
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from regimerisk.marketdata.prices import FLOAT_FORMAT, DATE_FORMAT, write_price_table
from regimerisk.models.market_model import InstrumentMeta, PriceTable
from regimerisk.models.types import IntArray

COUNTRIES = ("FR", "DE", "IT", "CH", "NL", "GB", "ES", "BE")


class SyntheticMarketSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_weeks: int = Field(520, ge=20)
    index_ticker: str = "INDEX"
    n_insurers: int = Field(8, ge=0)
    block: Tuple[float, float] = (0.55, 0.75)
    vol_ratio: float = Field(3.0, gt=1.0)
    rho_calm: float = Field(0.3, ge=0.0, lt=1.0)
    rho_high: float = Field(0.8, ge=0.0, lt=1.0)
    log_vol_persistence: float = Field(0.9, ge=0.0, lt=1.0)
    log_vol_noise: float = Field(0.05, ge=0.0)
    start: str = "2005-01-07"

    @model_validator(mode="after")
    def _check_block(self) -> "SyntheticMarketSpec":
        low, high = self.block
        if not 0.0 < low < high < 1.0:
            raise ValueError("block must satisfy 0 < start < end < 1 (fractions of the sample)")
        return self

    @property
    def insurer_tickers(self) -> List[str]:
        return [f"INS{j + 1}" for j in range(self.n_insurers)]

    @property
    def tickers(self) -> List[str]:
        return [self.index_ticker, *self.insurer_tickers]

    def block_bounds(self) -> Tuple[int, int]:
        """
        First and one-past-last return period of the high-variance block.
        """
        return int(self.block[0] * self.n_weeks), int(self.block[1] * self.n_weeks)


class SyntheticMarket(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    spec: SyntheticMarketSpec
    prices: PriceTable
    variances: pd.DataFrame
    regimes: IntArray


def _equicorrelation(k: int, rho: float) -> np.ndarray:
    return np.full((k, k), rho) + (1.0 - rho) * np.eye(k)


def simulate_market(spec: SyntheticMarketSpec = None, seed: int = 0) -> SyntheticMarket:
    """
    Generate weekly (Friday) prices of the index and the insurers.

    Args:
        spec (SyntheticMarketSpec, optional): Generator settings.
        seed (int): Seed of the numpy generator.

    Returns:
        SyntheticMarket: Prices with metadata, the true variances and the true regime (1 calm, 2 block)
        of every return period.
    """
    spec = spec or SyntheticMarketSpec()
    rng = np.random.default_rng(seed)
    tickers = spec.tickers
    k, n = len(tickers), spec.n_weeks
    start, end = spec.block_bounds()
    regimes = np.ones(n, dtype=int)
    regimes[start:end] = 2

    calm_vol = np.concatenate([[0.02], rng.uniform(0.025, 0.04, size=k - 1)])
    drift = rng.uniform(0.0, 0.002, size=k)
    log_noise = np.zeros((n, k))
    shocks = rng.standard_normal((n, k)) * spec.log_vol_noise
    for t in range(1, n):
        log_noise[t] = spec.log_vol_persistence * log_noise[t - 1] + shocks[t]
    shift = np.where(regimes == 2, 2.0 * np.log(spec.vol_ratio), 0.0)[:, None]
    h = calm_vol[None, :] ** 2 * np.exp(log_noise + shift)

    chol = {1: np.linalg.cholesky(_equicorrelation(k, spec.rho_calm)),
            2: np.linalg.cholesky(_equicorrelation(k, spec.rho_high))}
    normals = rng.standard_normal((n, k))
    z = np.vstack([chol[regime] @ normals[t] for t, regime in enumerate(regimes)])
    returns = drift[None, :] + np.sqrt(h) * z

    dates = pd.date_range(spec.start, periods=n + 1, freq="W-FRI", name="date")
    log_prices = np.vstack([np.zeros(k), np.cumsum(returns, axis=0)]) + np.log(100.0)
    prices = pd.DataFrame(np.exp(log_prices), index=dates, columns=tickers)
    meta = _metadata(spec, rng)
    variances = pd.DataFrame(h, index=dates[1:], columns=tickers)
    return SyntheticMarket(spec=spec, prices=PriceTable(prices=prices, meta=meta), variances=variances,
                           regimes=regimes)


def _metadata(spec: SyntheticMarketSpec, rng: np.random.Generator) -> Dict[str, InstrumentMeta]:
    meta = {spec.index_ticker: InstrumentMeta(ticker=spec.index_ticker, name="Synthetic insurance index")}
    for j, ticker in enumerate(spec.insurer_tickers):
        meta[ticker] = InstrumentMeta(ticker=ticker, name=f"Synthetic insurer {j + 1}",
                                      country=COUNTRIES[j % len(COUNTRIES)],
                                      total_assets_bn_usd=round(float(rng.uniform(100.0, 1000.0)), 1))
    return meta


def write_market(market: SyntheticMarket, outdir: Path, seed: int = 12345) -> Dict[str, Path]:
    """
    Write `prices.csv`, `instruments.csv`, `truth.csv` and a `config.json` that runs the
    pipeline on them.

    Returns:
        Dict[str, Path]: Written files by role.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {name: outdir / name for name in ("prices.csv", "instruments.csv", "truth.csv", "config.json")}
    write_price_table(market.prices, paths["prices.csv"])
    meta = pd.DataFrame([entry.model_dump() for entry in market.prices.meta.values()])
    meta.to_csv(paths["instruments.csv"], index=False, lineterminator="\n")
    truth = market.variances.copy()
    truth.insert(0, "regime", market.regimes)
    truth.to_csv(paths["truth.csv"], float_format=FLOAT_FORMAT, date_format=DATE_FORMAT, lineterminator="\n")
    spec = market.spec
    config = {
        "data": {"prices_path": "prices.csv", "meta_path": "instruments.csv", "frequency": "weekly"},
        "index_ticker": spec.index_ticker,
        "insurer_tickers": spec.insurer_tickers,
        "seed": seed,
        "output_dir": str(outdir / "out"),
    }
    paths["config.json"].write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return paths
