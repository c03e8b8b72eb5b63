"""Toolkit for READ/WRITE action programs in simultaneous translation:
alignment-driven oracle generation, delay metrics, a step simulator, and
coupled scheduled-sampling imitation learning."""

from .corpus import (
    AlignmentSet,
    SentencePair,
    SyntheticTaskConfig,
    Vocabulary,
    gen_synthetic,
    parse_parallel,
    parse_pharaoh,
)
from .metrics import (
    average_lagging,
    average_proportion,
    corpus_bleu,
    delay_report,
    differentiable_al,
)
from .oracle import OracleConfig, anchor_alignment, generate_oracle, oracle_corpus
from .program import (
    Action,
    READ,
    WRITE,
    add_delay,
    format_program,
    g_vector,
    parse_program,
    perturb_prog_valid,
    perturb_seq,
    validity,
    wait_k_program,
)
from .simulate import SimConfig, Transcript, playback, render_trace, run_episode

__version__ = "0.1.0"
