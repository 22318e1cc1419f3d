"""Multi-domain negative binomial factor analysis: Gibbs fitting, feature
extraction, synthetic data and the evaluation harness."""

# Lets a build tree's compiled module sit beside the source package.
__path__ = __import__("pkgutil").extend_path(__path__, __name__)

from ._core import (  # noqa: E402
    ChainConfig,
    DataError,
    Hyperparameters,
    LinearModel,
    NumericError,
    ParameterError,
    SynthConfig,
    __version__,
    evaluate,
    extract,
    fit,
    generate,
    run_cli,
    train_linear,
)

VARIANTS = ("bmdl", "hgnbp", "hdp-nbfa", "nb-hdp", "target-only")

__all__ = [
    "ChainConfig",
    "DataError",
    "Hyperparameters",
    "LinearModel",
    "NumericError",
    "ParameterError",
    "SynthConfig",
    "VARIANTS",
    "__version__",
    "evaluate",
    "extract",
    "fit",
    "generate",
    "run_cli",
    "train_linear",
]
