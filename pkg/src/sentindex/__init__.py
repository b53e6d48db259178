"""Lexicon-based sentiment classification and corpus sentiment indexes."""

__version__ = "0.1.0"

from .classifier import (
    Classification,
    DictRuleConfig,
    classify_dict,
    classify_nb,
    emotion_delta,
)
from .evaluation import ConfusionMatrix, EvalReport, alpha_sweep, confusion, report
from .index import (
    BucketCounters,
    CounterStore,
    IndexConfig,
    IndexRow,
    dynamic_range,
    merge,
    observe,
    series,
    text_emotion_index,
    text_sentiment_index,
    word_emotion_index,
    word_sentiment_index,
)
from .ingest import Document, IngestStats, stream_corpus
from .lexicon import (
    NbModel,
    SentimentLexicon,
    load_lexicon,
    load_nb_model,
    sample_lexicon_path,
)
from .pipeline import TextClassifier, aggregate, classify_stream
from .textproc import Normalizer, TokenMultiset, get_normalizer, normalize_text, tokenize
