import logging

from .alignment import AlignmentMatrix, Mapping, binarize, greedy_map, \
    load_alignment, top_k, top_k_columns, write_alignment
from .consistency import MncScore, average_mnc, degree_mnc_profile, \
    mnc_matrix, mnc_pair, node_mnc
from .experiment import ExperimentConfig, evaluate_file, run_benchmark, \
    run_external, scaling_probe
from .graph import Graph, NoiseSpec, Permutation, apply_noise, \
    load_edge_list, noisy_copy, permute, random_graph
from .initializers import InitSpec, corrupted_truth, degree_prior, \
    make_initial, random_map
from .metrics import MetricsReport, accuracy, conserved_network, evaluate, \
    lccc, normalized_overlap, topk_accuracy
from .refine import IterationTrace, RefineConfig, auto_epsilon, \
    mnc_update_dense, normalize_single_pass, normalize_sinkhorn, refine, \
    refine_dense, refine_sparse
from .utils import add_file_handlers, initialize_logger, \
    remove_file_handlers, set_log_level
from .version import __version__

logger = logging.getLogger(__name__)
initialize_logger(logger)
