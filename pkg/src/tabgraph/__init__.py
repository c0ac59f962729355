"""tabgraph: table type classification over visibility graphs.

Tables arrive as word bounding-box records, become visibility graphs with
geometric + text-embedding node features, can be augmented with four
label-preserving graph operations, and are classified by a small graph
convolutional network trained with exact analytic gradients.
"""

from .augment import (
    AUG_PRESETS,
    AugmentConfig,
    AugOp,
    augment_to_size,
    detect_columns,
    detect_rows,
    remove_random_edges,
    remove_random_nodes,
    swap_columns,
    swap_rows,
)
from .dataset import (
    ClassLabel,
    DatasetManifest,
    RecordParseError,
    RecordValidationError,
    TableRecord,
    WordBox,
    class_distribution,
    load_manifest,
    load_record_file,
    parse_record_file,
    save_manifest,
    serialize_records,
    stratified_split,
)
from .embeddings import Embedder, HashEmbedder, VectorTable, load_vector_table
from .gnn import (
    ForwardTrace,
    ModelParams,
    NormAdjacency,
    forward,
    gcn_layer,
    init_params,
    load_checkpoint,
    loss_and_grad,
    mean_readout,
    normalize_adjacency,
    predict,
    predict_proba,
    save_checkpoint,
)
from .graphs import TableGraph, build_graph, geom_features, load_graphs, save_graphs
from .training import (
    ExperimentConfig,
    Metrics,
    TrainConfig,
    TrainingDivergedError,
    confusion,
    metrics_from_confusion,
    render_report_text,
    run_experiment,
    standardize_features,
    train,
)
from .visibility import active_backend, visibility_edges, visibility_pairs

__version__ = "0.1.0"
