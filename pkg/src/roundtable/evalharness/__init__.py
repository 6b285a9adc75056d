from .insertion import (
    AccuracyReport,
    InsertionTask,
    format_insertion_table,
    insertion_benchmark,
)
from .metrics import (
    Rubric,
    info_diversity,
    load_rubric_file,
    rubric_grade,
    truncate_words,
    unique_cited_urls,
)
from .runner import RagStep, TranscriptLog, rag_chatbot_step, run_budgeted, simulate_user
from .wildseek import SeekCase, load_bundled_sample, load_wildseek

__all__ = [
    "AccuracyReport",
    "InsertionTask",
    "RagStep",
    "Rubric",
    "SeekCase",
    "TranscriptLog",
    "format_insertion_table",
    "info_diversity",
    "insertion_benchmark",
    "load_bundled_sample",
    "load_rubric_file",
    "load_wildseek",
    "rag_chatbot_step",
    "rubric_grade",
    "run_budgeted",
    "simulate_user",
    "truncate_words",
    "unique_cited_urls",
]
