"""
regimerisk.workflows.reports
~~~~~~~~~~~~~~~~~~~~~~~~~~~~
Report files of a run: the model tables, regime labels, per-regime summaries, CoVaR paths and
the numeric data behind each figure, plus the run manifest.

All floats are written with 17 significant digits and no timestamps are recorded, so two runs
with the same configuration produce identical bytes.

Functions:
    - emit_reports: Write every report file available from the run artifacts.
    - write_manifest: List every file of the output directory with hashes and versions.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional

import numba
import numpy as np
import pandas as pd
import pydantic
import scipy
import sklearn
import statsmodels

import regimerisk
from regimerisk.core.clustering import validity_report_to_csv
from regimerisk.marketdata.prices import DATE_FORMAT, FLOAT_FORMAT
from regimerisk.models.config_model import PipelineConfig
from regimerisk.models.risk_model import RegimeSummary
from regimerisk.models.run_model import Manifest, Stage1Artifacts, Stage2Artifacts

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ["regime", "count", "mean", "median", "q1", "q3", "min", "max"]
SELECTION_COLUMNS = ["scope", "name", "candidate", "aic", "bic", "hqic", "shibata", "selected"]
MANIFEST_NAME = "manifest.json"


def _write_csv(frame: pd.DataFrame, path: Path, index: bool = False) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=index, float_format=FLOAT_FORMAT, date_format=DATE_FORMAT, lineterminator="\n")
    return path


def _write_json(payload: Any, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _summary_frame(summaries: Dict[str, RegimeSummary], key: str) -> pd.DataFrame:
    rows = []
    for name, summary in summaries.items():
        for label, stats in summary.regimes.items():
            rows.append({key: name, "regime": label, **stats.model_dump()})
    return pd.DataFrame(rows, columns=[key, *SUMMARY_COLUMNS])


def _fit_entry(fit, meta) -> Dict[str, Any]:
    entry = fit.to_dict()
    entry["meta"] = meta.model_dump() if meta is not None else None
    return entry


def _selection_frame(stage1: Stage1Artifacts, stage2: Stage2Artifacts) -> pd.DataFrame:
    fits = [("margin", ticker, fit.params.dist.family, fit.selection) for ticker, fit in stage1.margins.items()]
    if stage1.panel_dcc is not None:
        fits.append(("copula", "panel", stage1.panel_dcc.params.copula.family, stage1.panel_dcc.selection))
    fits.extend(("copula", insurer, fit.params.copula.family, fit.selection)
                for insurer, fit in stage2.pair_fits.items())
    rows = [{"scope": scope, "name": name, "candidate": candidate, **criteria, "selected": candidate == chosen}
            for scope, name, chosen, table in fits for candidate, criteria in sorted(table.items())]
    return pd.DataFrame(rows, columns=SELECTION_COLUMNS)


def emit_reports(outdir: Path, config: PipelineConfig, stage1: Stage1Artifacts,
                 stage2: Optional[Stage2Artifacts] = None) -> List[Path]:
    """
    Write the report tables and figure data.

    Args:
        outdir (Path): Output directory.
        config (PipelineConfig): The run configuration.
        stage1 (Stage1Artifacts): Panel margins, correlation model and regimes.
        stage2 (Stage2Artifacts, optional): Pair fits and CoVaR.

    Returns:
        List[Path]: Written files.
    """
    outdir = Path(outdir)
    stage2 = stage2 or Stage2Artifacts()
    meta = stage1.ingest.meta
    dates = pd.DatetimeIndex(stage1.ingest.dates, name="date")
    regimes = stage1.regimes
    partition = regimes.partition
    written = []

    panel_tickers = regimes.features.tickers
    written.append(_write_json({
        "instruments": [_fit_entry(stage1.margins[ticker], meta.get(ticker)) for ticker in panel_tickers],
        "dcc": stage1.panel_dcc.to_dict() if stage1.panel_dcc is not None else None,
    }, outdir / "table2.json"))
    written.append(outdir / "table3.csv")
    (outdir / "table3.csv").write_text(validity_report_to_csv(regimes.report), encoding="utf-8")
    index = config.index_ticker
    written.append(_write_json(_fit_entry(stage1.margins[index], meta.get(index)), outdir / "table4.json"))

    rows = [{"pair": insurer, "parameter": name, "estimate": estimate, "se": se, "pvalue": pvalue}
            for insurer, fit in stage2.pair_fits.items() for name, estimate, se, pvalue in fit.table_rows()]
    written.append(_write_csv(pd.DataFrame(rows, columns=["pair", "parameter", "estimate", "se", "pvalue"]),
                              outdir / "table5.csv"))
    selection = _selection_frame(stage1, stage2)
    if len(selection):
        written.append(_write_csv(selection, outdir / "model_selection.csv"))
    written.append(_write_csv(partition.to_frame(), outdir / "regimes.csv", index=True))

    covar = stage2.covar
    correlations = pd.concat([
        _summary_frame(covar.panel_correlation_summaries, "pair").assign(scope="panel"),
        _summary_frame(covar.pair_correlation_summaries, "pair").assign(scope="pair"),
    ], ignore_index=True)[["scope", "pair", *SUMMARY_COLUMNS]]
    written.append(_write_csv(correlations, outdir / "correlations_by_regime.csv"))
    covar_summary = _summary_frame(covar.covar_summaries, "insurer")
    written.append(_write_csv(covar_summary, outdir / "covar_by_regime.csv"))
    for insurer, series in covar.series.items():
        written.append(_write_csv(series.to_frame(), outdir / "covar" / f"{insurer}.csv", index=True))

    written.extend(_emit_plotdata(outdir / "plotdata", dates, stage1, stage2))
    logger.info(f"Wrote {len(written)} report files to {outdir}")
    return written


def _emit_plotdata(plotdir: Path, dates: pd.DatetimeIndex, stage1: Stage1Artifacts,
                   stage2: Stage2Artifacts) -> List[Path]:
    regimes = stage1.regimes
    features = regimes.features
    labels = regimes.partition.labels
    covar = stage2.covar
    variances = pd.DataFrame(features.values, index=dates, columns=features.tickers)
    files = [
        _write_csv(variances, plotdir / "fig3_conditional_variances.csv", index=True),
        _write_csv(pd.DataFrame({"label": labels, "mean_variance": features.values.mean(axis=1)}, index=dates),
                   plotdir / "fig4_regimes.csv", index=True),
        _write_csv(pd.DataFrame({"label": labels, "silhouette": regimes.silhouette_widths}, index=dates),
                   plotdir / "fig5_silhouette.csv", index=True),
        _write_csv(_summary_frame(covar.variance_summaries, "ticker"), plotdir / "fig6_variance_by_regime.csv"),
        _write_csv(_summary_frame(covar.panel_correlation_summaries, "pair"),
                   plotdir / "fig7_panel_correlations_by_regime.csv"),
    ]
    pair_paths = pd.DataFrame({insurer: fit.path.pair(0, 1) for insurer, fit in stage2.pair_fits.items()},
                              index=dates)
    files.append(_write_csv(pair_paths, plotdir / "fig8_pair_correlations.csv", index=True))
    files.append(_write_csv(_summary_frame(covar.pair_correlation_summaries, "pair"),
                            plotdir / "fig9_pair_correlations_by_regime.csv"))
    files.append(_write_csv(_summary_frame(covar.covar_summaries, "insurer"), plotdir / "fig10_covar_by_regime.csv"))
    return files


def library_versions() -> Dict[str, str]:
    return {
        "regimerisk": regimerisk.__version__,
        "numpy": np.__version__,
        "pandas": pd.__version__,
        "scipy": scipy.__version__,
        "statsmodels": statsmodels.__version__,
        "scikit-learn": sklearn.__version__,
        "numba": numba.__version__,
        "pydantic": pydantic.VERSION,
    }


def write_manifest(outdir: Path, config: PipelineConfig, data_hash: Optional[str], stages: Iterable[str],
                   failures: Optional[Dict[str, str]] = None) -> Manifest:
    """
    Write `manifest.json` listing every file under the output directory, itself included.

    Returns:
        Manifest: The written manifest.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    files = {path.relative_to(outdir).as_posix() for path in outdir.rglob("*") if path.is_file()}
    files.add(MANIFEST_NAME)
    manifest = Manifest(config_hash=config.config_hash(), data_hash=data_hash, versions=library_versions(),
                        stages=list(stages), files=sorted(files), failures=dict(sorted((failures or {}).items())))
    _write_json(manifest.model_dump(), outdir / MANIFEST_NAME)
    return manifest
