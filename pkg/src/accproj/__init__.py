"""Accumulated projection (SAP / MSAP) solvers for linear systems."""
from .baselines import GmresConfig, JacobiConfig, solve_block_jacobi, solve_direct, solve_gmres
from .estimators import AccumulatedProjectionSolver, BlockJacobiSolver, GMRESSolver
from .exceptions import (AccProjError, DegenerateDirection, Diverged, NotConverged,
                         OrthogonalRhs, ParseError, QuadratureFailure, RankDeficient,
                         RankDeficientBlock, Singular, SingularBlock, UnsupportedField,
                         ZeroMatrix)
from .linalg import QRFactor, condition_estimate, householder_qr, relative_residual, solve_gram
from .partition import BlockPartition, BlockSpec, block_count, build_partition
from .problems import (BvpSpec, LinearProblem, assemble_fem_bvp, gen_random_consistent,
                       gen_tridiag, make_problem, model_bvp, read_matrix_market,
                       write_matrix_market)
from .projection import (ProjectionState, TwoVectorResult, ap_step_fast, ap_step_naive,
                         ap_sweep, init_state, optimal_two_vector, window_project)
from .solvers import SolveReport, SolverConfig, solve_msap1, solve_msap2, solve_sap

__version__ = "0.1.0"
