"""
regimerisk.workflows.stages
~~~~~~~~~~~~~~~~~~~~~~~~~~~
Pipeline stage functions. Each stage takes the run context plus the results of the stages it
depends on, and is wrapped in a `StageNode` by the pipeline workflow.

Classes:
    - RunContext: Configuration, model store and run logger shared by the stages.

Functions:
    - ingest_stage, fit_margins_stage, fit_panel_dcc, fit_pair_dccs, fit_dcc_stage
    - regimes_stage, covar_stage
"""
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from regimerisk.core.clustering import regime_search, silhouette_samples
from regimerisk.core.covar import covar_series, regime_correlation_summary, regime_summary
from regimerisk.core.dcc import dcc_path, fit_dcc, select_copula_family
from regimerisk.core.distributions import dist_cdf
from regimerisk.core.garch import arma_egarch_filter, fit_arma_egarch, select_margin_distribution
from regimerisk.exceptions import ConfigError, InvalidParameterError, NumericError, RegimeRiskError
from regimerisk.marketdata import FilePriceSource, align, load_instrument_meta, load_price_table, to_log_returns
from regimerisk.marketdata.prices import write_return_panel
from regimerisk.models.cluster_model import FeatureMatrix
from regimerisk.models.config_model import ModelConfig, PipelineConfig
from regimerisk.models.dcc_model import DccFit, DccParams
from regimerisk.models.garch_model import ArmaEgarchParams, ArmaEgarchSpec, UnivariateFit
from regimerisk.models.run_model import CovarResult, DccResult, IngestResult, RegimeResult
from regimerisk.utils.loggers import RunLogger
from regimerisk.utils.retry import retry
from regimerisk.workflows.artifact_store import ArtifactStore, fingerprint

PAIR_ATTEMPTS = 3
PAIR_RETRIED = (NumericError, InvalidParameterError)
PAIR_ISOLATED = (RegimeRiskError, np.linalg.LinAlgError, ValueError)


class RunContext:
    """
    State shared by the stages of one run.
    """

    def __init__(self, config: PipelineConfig, store: Optional[ArtifactStore] = None,
                 run_logger: Optional[RunLogger] = None):
        self.config = config
        self.output_dir = Path(config.output_dir)
        self.store = store or ArtifactStore(self.output_dir, force=config.force)
        self.run_logger = run_logger or RunLogger.from_config("regimerisk", config.logging)

    def log(self, message: str, stage: str, level: str = "INFO", **fields):
        self.run_logger.log(message, level=level, stage=stage, **fields)


def ingest_stage(context: RunContext) -> IngestResult:
    """
    Load prices, compute log returns and align every configured instrument on common dates.

    Raises:
        ConfigError: If a configured ticker is absent from the price data.
    """
    config = context.config
    table = load_price_table(FilePriceSource(config.data.prices_path), format=config.data.format)
    missing = [ticker for ticker in config.all_tickers if ticker not in table.tickers]
    if missing:
        raise ConfigError(f"Tickers {missing} are not in {config.data.prices_path}")
    meta = load_instrument_meta(FilePriceSource(config.data.meta_path)) if config.data.meta_path else {}
    panel = align(to_log_returns(table, config.data.frequency).select(config.all_tickers))
    data_hash = fingerprint(panel.values, [str(date.date()) for date in panel.dates], panel.tickers)
    context.output_dir.mkdir(parents=True, exist_ok=True)
    write_return_panel(panel, context.output_dir / "returns.csv")
    context.log(f"{len(panel.dates)} periods x {len(panel.tickers)} instruments", stage="ingest",
                data_hash=data_hash[:12])
    return IngestResult(panel=panel, meta=meta, data_hash=data_hash)


def _margin_key(context: RunContext, ingest: IngestResult, ticker: str) -> str:
    config = context.config
    return fingerprint(ingest.panel.column(ticker), [str(date.date()) for date in ingest.dates],
                       config.model.orders.model_dump(), config.model.margin_settings(),
                       config.optimizer.model_dump(), config.seed)


def _fit_margin(model: ModelConfig, series: np.ndarray, opts, seed: int, ticker: str) -> UnivariateFit:
    try:
        if model.dist_family != "auto":
            return fit_arma_egarch(ArmaEgarchSpec(orders=model.orders, family=model.dist_family), series, opts,
                                   seed=seed, ticker=ticker)
        fit, table = select_margin_distribution(series, model.orders, model.dist_candidates, opts, seed=seed,
                                                ticker=ticker, criterion=model.dist_criterion)
        return fit.model_copy(update={"selection": table})
    except RegimeRiskError as e:
        raise e.__class__(f"series '{ticker}': {e}") from e


def fit_margins_stage(context: RunContext, ingest: IngestResult) -> Dict[str, UnivariateFit]:
    """
    Fit (or reload) the ARMA-eGARCH margin of every instrument.

    Stored fits are reused when their data and settings key matches; the filter output is
    recomputed from the stored parameters. With `dist_family` "auto" every candidate family is
    fitted and the one with the smallest `dist_criterion` is kept.
    """
    config = context.config
    fits: Dict[str, UnivariateFit] = {}
    pending: List[Tuple[str, str]] = []
    for ticker in ingest.panel.tickers:
        key = _margin_key(context, ingest, ticker)
        payload = context.store.load("margins", ticker, key)
        if payload is None:
            pending.append((ticker, key))
            continue
        series = ingest.panel.column(ticker)
        params = ArmaEgarchParams.from_payload(payload)
        fits[ticker] = UnivariateFit.from_dict(payload, filter=arma_egarch_filter(params, series))
        context.log(f"reused stored margin for {ticker}", stage="fit-margins")
    arguments = [(config.model, ingest.panel.column(ticker), config.optimizer, config.seed, ticker)
                 for ticker, _ in pending]
    if config.workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            fitted = list(executor.map(_fit_margin, *zip(*arguments)))
    else:
        fitted = [_fit_margin(*argument) for argument in arguments]
    for (ticker, key), fit in zip(pending, fitted):
        context.store.save("margins", ticker, key, fit.to_dict())
        level = "INFO" if fit.convergence.converged else "WARNING"
        context.log(f"fitted {ticker}", stage="fit-margins", level=level, loglik=round(fit.filter.loglik, 6),
                    converged=fit.convergence.converged, dist=fit.params.dist.family)
        fits[ticker] = fit
    return {ticker: fits[ticker] for ticker in ingest.panel.tickers}


def pit_panel(margins: Dict[str, UnivariateFit], tickers: List[str]) -> Tuple[np.ndarray, np.ndarray]:
    """
    PIT values u = F(z) and standardized residuals z of the given margins, column-stacked.
    """
    U = np.column_stack([dist_cdf(margins[ticker].params.dist, margins[ticker].filter.z) for ticker in tickers])
    Z = np.column_stack([margins[ticker].filter.z for ticker in tickers])
    return U, Z


def _fit_or_load_dcc(context: RunContext, kind: str, name: str, tickers: List[str],
                     margins: Dict[str, UnivariateFit], margin_keys: List[str], attempt: int = 0) -> DccFit:
    config, model = context.config, context.config.model
    U, Z = pit_panel(margins, tickers)
    key = fingerprint(margin_keys, model.copula_settings(), list(model.dcc_order),
                      model.score_source, config.optimizer.model_dump(), config.seed)
    payload = context.store.load(kind, name, key)
    if payload is not None:
        path = dcc_path(DccParams.from_dict(payload), U, model.score_source, Z)
        return DccFit.from_dict(payload, path=path)
    settings = dict(order=tuple(model.dcc_order), opts=config.optimizer, score_source=model.score_source,
                    residuals=Z, seed=config.seed, tickers=tickers, attempt=attempt)
    if model.copula_family == "auto":
        fit, table = select_copula_family(U, families=model.copula_candidates, criterion=model.copula_criterion,
                                          **settings)
        fit = fit.model_copy(update={"selection": table})
    else:
        fit = fit_dcc(U, family=model.copula_family, **settings)
    context.store.save(kind, name, key, fit.to_dict())
    return fit


def fit_panel_dcc(context: RunContext, ingest: IngestResult, margins: Dict[str, UnivariateFit]) -> Optional[DccFit]:
    """
    k-variate DCC copula of the stage-1 panel; None for a single-instrument panel.
    """
    tickers = context.config.stage1_tickers
    if len(tickers) < 2:
        context.log("single-instrument panel; no correlation model", stage="fit-dcc", level="WARNING")
        return None
    keys = [_margin_key(context, ingest, ticker) for ticker in tickers]
    try:
        fit = _fit_or_load_dcc(context, "dcc", "panel", tickers, margins, keys)
    except RegimeRiskError as e:
        raise e.__class__(f"panel {tickers}: {e}") from e
    context.log(f"panel DCC over {len(tickers)} instruments", stage="fit-dcc",
                loglik=round(fit.diagnostics.loglik, 6), converged=fit.diagnostics.converged)
    return fit


def fit_pair_dccs(context: RunContext, ingest: IngestResult,
                  margins: Dict[str, UnivariateFit]) -> Tuple[Dict[str, DccFit], Dict[str, str]]:
    """
    Bivariate (index, insurer) DCC copulas on the stage-1 margins.

    A pair failing numerically is retried with perturbed starts. Any pair that still fails,
    numerically or otherwise, is recorded and skipped.

    Returns:
        Tuple[Dict[str, DccFit], Dict[str, str]]: Fits and failure messages keyed by insurer.
    """
    config = context.config
    index = config.index_ticker
    fits, failures = {}, {}
    for insurer in config.insurer_tickers:
        tickers = [index, insurer]
        keys = [_margin_key(context, ingest, ticker) for ticker in tickers]

        @retry(attempts=PAIR_ATTEMPTS, exceptions=PAIR_RETRIED, pass_attempt=True)
        def fit_pair(attempt: int = 0) -> DccFit:
            return _fit_or_load_dcc(context, "pairs", insurer, tickers, margins, keys, attempt=attempt)

        try:
            fits[insurer] = fit_pair()
        except PAIR_ISOLATED as e:
            failures[insurer] = f"{type(e).__name__}: {e}"
            context.log(f"pair ({index}, {insurer}) failed", stage="fit-dcc", level="ERROR", error=str(e))
            continue
        context.log(f"pair ({index}, {insurer})", stage="fit-dcc", loglik=round(fits[insurer].diagnostics.loglik, 6))
    return fits, failures


def fit_dcc_stage(context: RunContext, ingest: IngestResult, margins: Dict[str, UnivariateFit]) -> DccResult:
    panel = fit_panel_dcc(context, ingest, margins)
    pairs, failures = fit_pair_dccs(context, ingest, margins)
    return DccResult(panel=panel, pairs=pairs, failures=failures)


def regimes_stage(context: RunContext, ingest: IngestResult, margins: Dict[str, UnivariateFit]) -> RegimeResult:
    """
    Cluster the stage-1 conditional variances and select the regime partition.
    """
    config = context.config
    clustering = config.clustering
    tickers = config.stage1_tickers
    features = FeatureMatrix(dates=ingest.dates, tickers=tickers,
                             values=np.column_stack([margins[ticker].filter.h for ticker in tickers]))
    report, partition, _ = regime_search(features, clustering.k_range, clustering.methods, seed=config.seed,
                                         restarts=clustering.restarts, metric=clustering.metric,
                                         log_features=clustering.log_features)
    widths = silhouette_samples(features, partition, clustering.metric, clustering.log_features)
    context.log(f"selected {partition.method} with k={partition.k}", stage="regimes",
                silhouette=round(float(np.mean(widths)), 6))
    return RegimeResult(features=features, report=report, partition=partition, silhouette_widths=widths)


def covar_stage(context: RunContext, ingest: IngestResult, margins: Dict[str, UnivariateFit], dcc: DccResult,
                regimes: RegimeResult) -> CovarResult:
    """
    CoVaR paths of every fitted pair and the per-regime summaries of CoVaR, correlations and variances.
    """
    config = context.config
    partition, dates = regimes.partition, ingest.dates
    series, covar_summaries, pair_summaries = {}, {}, {}
    for insurer, fit in dcc.pairs.items():
        series[insurer] = covar_series(fit, margins[config.index_ticker], margins[insurer], dates, config.risk)
        covar_summaries[insurer] = regime_summary(series[insurer], partition, measure=f"covar[{insurer}]")
        name = f"{config.index_ticker}|{insurer}"
        pair_summaries[name] = regime_summary(fit.path.pair(0, 1), partition, measure=f"rho[{name}]", dates=dates)
        context.log(f"CoVaR for ({config.index_ticker}, {insurer})", stage="covar",
                    mean=round(float(np.mean(series[insurer].values)), 8))
    panel_summaries = {}
    if dcc.panel is not None:
        panel_summaries = regime_correlation_summary(dcc.panel.path, dates, partition, tickers=dcc.panel.tickers)
    variance_summaries = {
        ticker: regime_summary(regimes.features.values[:, column], partition, measure=f"h[{ticker}]", dates=dates)
        for column, ticker in enumerate(regimes.features.tickers)
    }
    return CovarResult(series=series, covar_summaries=covar_summaries, pair_correlation_summaries=pair_summaries,
                       panel_correlation_summaries=panel_summaries, variance_summaries=variance_summaries)
