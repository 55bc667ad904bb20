"""cfaudit: counterfactual bias auditing for classifiers trained without
sensitive features.

The pipeline: train a decision maker on non-sensitive features, generate
counterfactuals for its negatively predicted test samples, classify the
sensitive attribute of originals and counterfactuals, and measure how often
flipping the decision also flips the predicted group (CFlips / delta-CFlips).
Proxy features are ranked by correlating perturbations with shifts in the
sensitive classifier's probability.
"""

from .audit import AuditConfig, ModelSpec, config_from_file, report_emit, run_audit
from .cfgen import (
    CounterfactualSet,
    GeneticConfig,
    batch_generate,
    default_genetic_config,
    generate_genetic,
    generate_kdtree,
    perturbation,
)
from .data import (
    Dataset,
    EncodedMatrix,
    encode,
    ex_ante_sp,
    group_distribution,
    load_csv,
    stratified_split,
)
from .distance import GowerDistance
from .fairmetrics import (
    FlipRecord,
    GroupFlipSummary,
    ablation_curve,
    cflips_group,
    cflips_sample,
    dao,
    delta_cflips,
    deo,
    dsp,
)
from .proxy import ProxyReport, delta_shift, proxy_correlations, top_k
from .schema import Feature, FeatureSchema, GroupSpec, load_schema
from .synth import generate_synthetic, synthetic_schema

__version__ = "0.1.0"
