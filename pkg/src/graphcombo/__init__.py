"""Bayesian optimization of black-box functions on k-node subsets of graphs.

The search space is a combinatorial graph whose nodes are k-subsets,
adjacent when they differ in one element whose two versions are neighbors
in the underlying graph.  Local subgraphs of this space are sampled
recursively around the incumbent, a spectral Gaussian process is fit on
them, and Expected Improvement picks the next query.
"""

__version__ = "0.1.0"

from .analysis import kernel_validation, smoothness_curves, spearman_rho
from .baselines import (run_bfs_combo, run_dfs_combo, run_k_local_search,
                        run_k_random_walk, run_local_search_combo,
                        run_random_search)
from .centrality import (degree_centrality, eigenvector_centrality, pagerank,
                         transitivity)
from .combo import (ComboNode, ComboSubgraph, brute_force_combo_graph,
                    combo_degree, combo_hop_distance, combo_neighbors,
                    combo_node, is_combo_edge, sample_combo_subgraph,
                    set_difference_distance)
from .epidemics import (IcParams, SirParams, flatten_curve_objective,
                        ic_simulate, influence_objective,
                        patient_zero_objective, sir_simulate)
from .gp import (GPModel, SubgraphSurrogate, fit_hyperparameters,
                 log_marginal_likelihood, posterior)
from .graphs import (Graph, NeighborOracle, generate_ba, generate_grid2d,
                     generate_sbm, generate_ws, line_graph, load_edge_list,
                     save_edge_list, shortest_path_hops)
from .kernels import KernelSpec, default_kernel, kernel_diag, kernel_matrix
from .objectives import (Objective, ackley_grid_scores, avg_node_score,
                         eigenvector_signal_objective, ground_truth,
                         smoothness_energy, standardized_pagerank_objective,
                         transitivity_drop_objective, with_observation_noise)
from .records import RunRecord, RunRow
from .search import (RunConfig, expected_improvement, initialize,
                     restart_location, run_graphcombo, run_graphcombo_noisy,
                     select_next)
from .spectral import SpectralBasis, eigendecompose, normalized_laplacian
