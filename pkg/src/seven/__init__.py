"""seven: PMI word graphs with learned, compressed relation vectors."""

from .corpus import Vocabulary, build_vocabulary, segment_sentences, tokenize
from .embeddings import EmbeddingStore, load_embeddings, save_embeddings
from .graph import (
    CooccurrenceCounts,
    EdgeGraph,
    count_cooccurrences,
    pair_weight,
    pmi,
    select_edges,
)
from .relvec import (
    RelationRecord,
    RelationStore,
    build_relation_records,
    relation_strength,
    sentence_context_vectors,
)
from .autoenc import (
    AutoencoderParams,
    TrainConfig,
    compress_store,
    decode,
    encode,
    gradients,
    train,
)
from .simeval import NetworkHandle, cosine, evaluate, match_neighbors, similarity
from .query import export_enriched, nearest_relations, neighbors_of
from .pipeline import PipelineConfig, load_network, run_pipeline
from .errors import DataError, NumericError, OOVWordError

__version__ = "0.1.0"
