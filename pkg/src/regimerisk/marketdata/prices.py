"""
regimerisk.marketdata.prices
~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Price ingestion and return-panel construction.

Functions:
    - load_price_table: Parse a wide or long price CSV into a PriceTable.
    - load_instrument_meta: Parse the optional instrument metadata CSV.
    - to_log_returns: Log-returns, optionally on the last quote of each ISO week.
    - align: Drop periods with any missing return.
    - merge_panels: Outer-join panels on their dates.
    - write_price_table / write_return_panel: Wide CSV export.
"""
import io
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

from regimerisk.exceptions import (
    DataError,
    DuplicateCellError,
    EmptyTableError,
    InsufficientDataError,
    MalformedDateError,
    NonPositivePriceError,
)
from regimerisk.marketdata.sources import PriceSource
from regimerisk.models.market_model import Frequency, InstrumentMeta, PriceTable, ReturnPanel

logger = logging.getLogger(__name__)

DATE_FORMAT = "%Y-%m-%d"
FLOAT_FORMAT = "%.17g"


def _read_text(source: Union[PriceSource, str]) -> str:
    if not isinstance(source, PriceSource):
        return source
    try:
        return source.get_text()
    except OSError as e:
        raise DataError(f"cannot read {source.name}: {e}") from e


def _read_frame(source: Union[PriceSource, str]) -> pd.DataFrame:
    text = _read_text(source)
    if not text.strip():
        raise EmptyTableError("price source is empty")
    frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False, skipinitialspace=True)
    frame.columns = [str(column).strip() for column in frame.columns]
    if not frame.columns.size or frame.columns[0].lower() != "date":
        raise DataError("first column must be 'date'")
    frame = frame.rename(columns={frame.columns[0]: "date"})
    if frame.empty:
        raise EmptyTableError("price table has no data rows")
    return frame


def _parse_dates(values: pd.Series) -> pd.Series:
    parsed = pd.to_datetime(values.str.strip(), format=DATE_FORMAT, errors="coerce")
    bad = np.flatnonzero(parsed.isna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise MalformedDateError(f"malformed date '{values.iloc[row]}'", row=row + 1)
    return parsed


def _parse_prices(values: pd.Series, label: str) -> pd.Series:
    text = values.str.strip()
    parsed = pd.to_numeric(text.where(text != ""), errors="coerce")
    invalid = np.flatnonzero((parsed.isna() & (text != "")).to_numpy())
    if invalid.size:
        row = int(invalid[0])
        raise DataError(f"non-numeric price '{values.iloc[row]}' for {label}", row=row + 1)
    infinite = np.flatnonzero(np.isinf(parsed.to_numpy(dtype=float)))
    if infinite.size:
        row = int(infinite[0])
        raise DataError(f"non-finite price '{values.iloc[row]}' for {label}", row=row + 1)
    non_positive = np.flatnonzero((parsed <= 0).to_numpy())
    if non_positive.size:
        row = int(non_positive[0])
        raise NonPositivePriceError(f"non-positive price {parsed.iloc[row]} for {label}", row=row + 1)
    return parsed.astype(float)


def load_price_table(source: Union[PriceSource, str], format: str = "wide",
                     meta: Optional[Dict[str, InstrumentMeta]] = None) -> PriceTable:
    """
    Parse delimiter-separated price text into a PriceTable sorted by date.

    Wide input is `date,TICKER1,TICKER2,...`; long input is `date,ticker,price`. Empty cells
    are missing quotes. Row numbers in errors count data rows from 1, header excluded.

    Args:
        source (PriceSource | str): The text source, or the raw text.
        format (str): "wide" or "long".
        meta (dict, optional): Instrument descriptors keyed by ticker.

    Returns:
        PriceTable: The parsed table.

    Raises:
        MalformedDateError, NonPositivePriceError, DuplicateCellError, EmptyTableError, DataError
    """
    frame = _read_frame(source)
    dates = _parse_dates(frame["date"])
    if format == "wide":
        tickers = [column for column in frame.columns if column != "date"]
        if not tickers:
            raise EmptyTableError("price table has no price columns")
        duplicated = np.flatnonzero(dates.duplicated().to_numpy())
        if duplicated.size:
            row = int(duplicated[0])
            raise DuplicateCellError(f"duplicate date {dates.iloc[row].date()}", row=row + 1)
        prices = pd.DataFrame({ticker: _parse_prices(frame[ticker], ticker) for ticker in tickers})
        prices.index = pd.DatetimeIndex(dates, name="date")
    elif format == "long":
        missing = {"ticker", "price"} - set(frame.columns)
        if missing:
            raise DataError(f"long format requires columns date,ticker,price; missing {sorted(missing)}")
        keys = pd.DataFrame({"date": dates, "ticker": frame["ticker"].str.strip()})
        duplicated = np.flatnonzero(keys.duplicated().to_numpy())
        if duplicated.size:
            row = int(duplicated[0])
            raise DuplicateCellError(
                f"duplicate cell ({keys['date'].iloc[row].date()}, {keys['ticker'].iloc[row]})", row=row + 1)
        keys["price"] = _parse_prices(frame["price"], "price")
        prices = keys.pivot(index="date", columns="ticker", values="price")
        prices = prices.reindex(columns=list(dict.fromkeys(keys["ticker"])))
        prices.columns.name = None
    else:
        raise ValueError(f"Unknown price table format '{format}'. Expected 'wide' or 'long'.")
    prices = prices.sort_index()
    logger.debug("Loaded price table with %d dates and %d tickers", *prices.shape)
    return PriceTable(prices=prices, meta=meta or {})


def load_instrument_meta(source: Union[PriceSource, str]) -> Dict[str, InstrumentMeta]:
    """
    Parse `ticker,name,country,total_assets_bn_usd` rows; every column but ticker is optional.
    """
    frame = pd.read_csv(io.StringIO(_read_text(source)), dtype=str, keep_default_na=False)
    if "ticker" not in frame.columns:
        raise DataError("instrument metadata requires a 'ticker' column")
    meta = {}
    for _, row in frame.iterrows():
        assets = row.get("total_assets_bn_usd", "")
        meta[row["ticker"]] = InstrumentMeta(
            ticker=row["ticker"],
            name=row.get("name") or None,
            country=row.get("country") or None,
            total_assets_bn_usd=float(assets) if assets else None,
        )
    return meta


def _weekly_last(prices: pd.DataFrame) -> pd.DataFrame:
    iso = prices.index.isocalendar()
    keys = [iso["year"].to_numpy(), iso["week"].to_numpy()]
    weekly = prices.groupby(keys).last()
    week_dates = pd.Series(prices.index, index=prices.index).groupby(keys).max()
    weekly.index = pd.DatetimeIndex(week_dates.to_numpy(), name="date")
    return weekly


def to_log_returns(table: PriceTable, frequency: Frequency = "weekly") -> ReturnPanel:
    """
    Log-returns ln(P_t / P_{t-1}) between consecutive retained dates.

    Weekly sampling keeps, per ticker, the last available quote of each ISO-8601 week,
    dated at the last observation of that week. A return touching a missing quote is missing.

    Args:
        table (PriceTable): The prices.
        frequency (str): "weekly" or "daily" (no resampling).

    Returns:
        ReturnPanel: Panel with one row less than the retained dates.

    Raises:
        InsufficientDataError: If a ticker has fewer than 2 usable dates.
    """
    prices = table.prices.astype(float)
    if frequency == "weekly":
        prices = _weekly_last(prices)
    elif frequency != "daily":
        raise ValueError(f"Unknown frequency '{frequency}'.")
    usable = prices.notna().sum(axis=0)
    short = [str(ticker) for ticker, count in usable.items() if count < 2]
    if len(prices) < 2 or short:
        raise InsufficientDataError(f"fewer than 2 usable dates for {short or list(prices.columns)}")
    returns = np.log(prices).diff().iloc[1:]
    return ReturnPanel(returns=returns, frequency=frequency)


def align(panel: ReturnPanel) -> ReturnPanel:
    """
    Remove every period with a missing cell, keeping column order.

    Raises:
        EmptyTableError: If nothing is left.
    """
    returns = panel.returns.dropna(how="any")
    if returns.empty:
        raise EmptyTableError("no complete periods left after alignment")
    dropped = len(panel.returns) - len(returns)
    if dropped:
        logger.info("Alignment dropped %d incomplete periods", dropped)
    return ReturnPanel(returns=returns, frequency=panel.frequency)


def merge_panels(*panels: ReturnPanel) -> ReturnPanel:
    """
    Outer-join panels on their dates; follow with `align` to keep the common dates.
    """
    if not panels:
        raise EmptyTableError("nothing to merge")
    frames = [panel.returns for panel in panels]
    columns = [column for frame in frames for column in frame.columns]
    if len(set(columns)) != len(columns):
        raise DataError("merged panels share tickers")
    merged = pd.concat(frames, axis=1, join="outer").sort_index()
    return ReturnPanel(returns=merged, frequency=panels[0].frequency)


def _write_wide(frame: pd.DataFrame, path: Union[str, Path, io.StringIO]):
    frame.to_csv(path, index_label="date", date_format=DATE_FORMAT, float_format=FLOAT_FORMAT,
                 lineterminator="\n")


def write_price_table(table: PriceTable, path: Union[str, Path, io.StringIO]):
    _write_wide(table.prices, path)


def write_return_panel(panel: ReturnPanel, path: Union[str, Path, io.StringIO]):
    _write_wide(panel.returns, path)
