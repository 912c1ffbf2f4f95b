from regimerisk.marketdata.prices import (
    align,
    load_instrument_meta,
    load_price_table,
    merge_panels,
    to_log_returns,
    write_price_table,
    write_return_panel,
)
from regimerisk.marketdata.sources import FilePriceSource, PriceSource, StringBufferPriceSource

__all__ = [
    "align",
    "load_instrument_meta",
    "load_price_table",
    "merge_panels",
    "to_log_returns",
    "write_price_table",
    "write_return_panel",
    "FilePriceSource",
    "PriceSource",
    "StringBufferPriceSource",
]
