"""
regimerisk.workflows.pipeline
~~~~~~~~~~~~~~~~~~~~~~~~~~~~~
The regime and CoVaR pipeline as a stage workflow, plus the two-stage programmatic API.

Stage order: ingest -> fit-margins -> fit-dcc -> regimes -> covar -> report. Running up to a
stage runs its dependencies only; fitted models are reused from the output directory when
their inputs are unchanged.

Classes:
    - RegimeRiskWorkflow: The stage workflow.

Functions:
    - run_workflow: Execute the workflow up to a stage and write the manifest.
    - run_stage1: Margins, panel correlation model and regimes.
    - run_stage2: Pair correlation models and CoVaR on top of stage 1.
    - run_all: Both stages, the reports and the manifest.
"""
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from regimerisk.models.config_model import PipelineConfig
from regimerisk.models.garch_model import UnivariateFit
from regimerisk.models.run_model import (CovarResult, DccResult, IngestResult, Manifest, RegimeResult,
                                         Stage1Artifacts, Stage2Artifacts)
from regimerisk.workflows.abstract_workflow import AbstractWorkflow
from regimerisk.workflows.node import StageNode
from regimerisk.workflows.reports import emit_reports, write_manifest
from regimerisk.workflows.stages import (RunContext, covar_stage, fit_dcc_stage, fit_margins_stage, fit_pair_dccs,
                                         fit_panel_dcc, ingest_stage, regimes_stage)

logger = logging.getLogger(__name__)

STAGE_NAMES = ("ingest", "fit-margins", "fit-dcc", "regimes", "covar", "report")


def _artifacts(ingest: IngestResult, margins: Dict[str, UnivariateFit], dcc: DccResult, regimes: RegimeResult,
               covar: Optional[CovarResult] = None) -> Tuple[Stage1Artifacts, Stage2Artifacts]:
    stage1 = Stage1Artifacts(ingest=ingest, margins=margins, panel_dcc=dcc.panel, regimes=regimes)
    stage2 = Stage2Artifacts(pair_fits=dcc.pairs, covar=covar or CovarResult(), failures=dcc.failures)
    return stage1, stage2


def report_stage(context: RunContext, ingest: IngestResult, margins: Dict[str, UnivariateFit], dcc: DccResult,
                 regimes: RegimeResult, covar: CovarResult) -> List[Path]:
    """
    Write the report tables and figure data of a complete run.
    """
    stage1, stage2 = _artifacts(ingest, margins, dcc, regimes, covar)
    written = emit_reports(context.output_dir, context.config, stage1, stage2)
    context.log(f"wrote {len(written)} report files", stage="report")
    return written


class RegimeRiskWorkflow(AbstractWorkflow):
    """
    Workflow of the pipeline stages; every stage receives the run context as the `context` input.
    """

    def __init__(self, name: str = "regimerisk"):
        super().__init__(name)
        self.define_workflow()

    def define_workflow(self):
        self.add_node(StageNode("ingest", ingest_stage))
        self.add_node(StageNode("fit-margins", fit_margins_stage, inputs={"ingest": "ingest"}))
        self.add_node(StageNode("fit-dcc", fit_dcc_stage, inputs={"ingest": "ingest", "margins": "fit-margins"}))
        self.add_node(StageNode("regimes", regimes_stage, inputs={"ingest": "ingest", "margins": "fit-margins"}))
        self.add_node(StageNode("covar", covar_stage, inputs={
            "ingest": "ingest", "margins": "fit-margins", "dcc": "fit-dcc", "regimes": "regimes"}))
        self.add_node(StageNode("report", report_stage, inputs={
            "ingest": "ingest", "margins": "fit-margins", "dcc": "fit-dcc", "regimes": "regimes", "covar": "covar"}))


def run_workflow(config: PipelineConfig, until: Optional[str] = None,
                 context: Optional[RunContext] = None) -> Tuple[Dict[str, Any], Manifest]:
    """
    Execute the pipeline up to `until` (every stage when None) and write the manifest.

    Args:
        config (PipelineConfig): The run configuration.
        until (str, optional): Last stage to run, one of STAGE_NAMES.
        context (RunContext, optional): Run context; built from `config` when omitted.

    Returns:
        Tuple[Dict[str, Any], Manifest]: Stage results keyed by stage name and the written manifest.
    """
    context = context or RunContext(config)
    workflow = RegimeRiskWorkflow()
    results = workflow.execute(inputs={"context": context}, until=until)
    ingest = results["ingest"]
    dcc = results.get("fit-dcc")
    manifest = write_manifest(context.output_dir, config, ingest.data_hash, list(results),
                              failures=dcc.failures if dcc is not None else None)
    context.log(f"completed stages {list(results)}", stage=until or "report")
    return results, manifest


def run_stage1(config: PipelineConfig, context: Optional[RunContext] = None) -> Stage1Artifacts:
    """
    Fit the margins of every instrument and the panel correlation model, then identify the regimes.

    Args:
        config (PipelineConfig): The run configuration.
        context (RunContext, optional): Run context; built from `config` when omitted.

    Returns:
        Stage1Artifacts: The stage-1 fits and regimes.
    """
    context = context or RunContext(config)
    ingest = ingest_stage(context)
    margins = fit_margins_stage(context, ingest)
    panel = fit_panel_dcc(context, ingest, margins)
    regimes = regimes_stage(context, ingest, margins)
    return Stage1Artifacts(ingest=ingest, margins=margins, panel_dcc=panel, regimes=regimes)


def run_stage2(config: PipelineConfig, stage1: Stage1Artifacts,
               context: Optional[RunContext] = None) -> Stage2Artifacts:
    """
    Fit the (index, insurer) correlation models on the stage-1 margins and compute CoVaR per regime.

    Args:
        config (PipelineConfig): The run configuration.
        stage1 (Stage1Artifacts): Result of `run_stage1` for the same configuration.
        context (RunContext, optional): Run context; built from `config` when omitted.

    Returns:
        Stage2Artifacts: Pair fits, CoVaR paths and summaries, and per-pair failures.
    """
    context = context or RunContext(config)
    pairs, failures = fit_pair_dccs(context, stage1.ingest, stage1.margins)
    dcc = DccResult(panel=stage1.panel_dcc, pairs=pairs, failures=failures)
    covar = covar_stage(context, stage1.ingest, stage1.margins, dcc, stage1.regimes)
    return Stage2Artifacts(pair_fits=pairs, covar=covar, failures=failures)


def run_all(config: PipelineConfig,
            context: Optional[RunContext] = None) -> Tuple[Stage1Artifacts, Stage2Artifacts, Manifest]:
    """
    Run every stage, write the reports and the manifest.

    Returns:
        Tuple[Stage1Artifacts, Stage2Artifacts, Manifest]: Both stages and the manifest.
    """
    results, manifest = run_workflow(config, context=context)
    stage1, stage2 = _artifacts(results["ingest"], results["fit-margins"], results["fit-dcc"], results["regimes"],
                                results["covar"])
    return stage1, stage2, manifest
