# flake8: noqa: F401

from .glm import GlmFamily, GAUSSIAN, BERNOULLI, POISSON, CoefVector, \
    DataShard, resolve_family, cumulant, local_loss, local_gradient, \
    local_hessian_quadform
from .cluster import ClusterSpec, Transport, RoundStats, WorkerServer, \
    aggregate_round, broadcast_and_aggregate
from .lasso import LassoConfig, LassoFit, lasso_fit, auto_lambda, \
    lambda_rate, soft_threshold
from .diht import DihtConfig, ScreeningRun, SurrogateState, IterationLog, \
    build_surrogate, surrogate_loss, surrogate_gradient, hard_threshold, \
    diht_step, diht_run, communication_rounds, largest_gram_eigenvalue, \
    static_step_size
from .ebic import ebic, select_k, EbicTrace
from .screen import DvsOptions, run_dvs, summarize
from .marginal import Method, MarginalUtility, pearson_utility, \
    kendall_utility, sirs_utility, dcor_utility, aggregate_and_rank
from .simulate import Scenario, ScenarioSpec, GeneratedDataset, generate, \
    ar1_cholesky, ar1_sample
from .dataio import load_shards, read_cache, write_cache, partition
from .metrics import ReplicationReport, compute_metrics, run_campaign, \
    run_partition_study
from .errors import DvsError, ConfigError, ShapeError, \
    InvalidArgumentError, GlmOverflowError, AggregationError, \
    NumericalFailure, DataIOError, DataValidationError
from .stream import Stream, Clock, combine
from .operators import fmap, where, scan, each, merge, timeout
