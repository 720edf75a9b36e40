"""Synergistic image and text adversarial attacks on toy dual encoders."""

from ._saattack import (
    CapabilityError,
    ConfigError,
    DegenerateInputError,
    Error,
    Lexicon,
    ShapeError,
    ToyEncoder,
    attack,
    bundled_vocabulary,
    cosine_similarity,
    default_config,
    eda_augment,
    project_linf,
    read_png,
    retrieve_topk,
    run_experiment,
    sia_augment,
    summary_csv,
    write_png,
    write_toy_dataset,
)

METHODS = ("sa", "pgd_only", "text_only", "sep")
