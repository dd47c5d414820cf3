"""Cyber-insurance contract design over finite attacker/defender scenarios."""

from .contracts import (
    AgentSpec,
    BestResponse,
    Contract,
    InsurerSpec,
    Intensity,
    LinearContract,
    Scenario,
    best_response,
    compute_reservation,
    insurer_objective,
    insurer_profit_distribution,
    ir_check,
    moral_hazard_intensity,
    user_cost,
    user_cost_distribution,
)
from .firstorder import SmoothFamily, exponential_breach_family, inner_response, solve_first_order
from .preferences import (
    DistortionFunction,
    RiskFunctional,
    UtilityCurve,
    arrow_pratt,
    avar,
    avar_minimization,
    choquet_distortion,
    evaluate_risk,
)
from .riskspace import (
    ActionGrid,
    LossDistribution,
    OutcomeSpace,
    RiskKernel,
    cdf,
    check_kernel_monotone,
    fosd_dominates,
    validate_distribution,
)
from .scenarios import (
    StackelbergSpec,
    load_scenario,
    preset_ransomware,
    preset_stackelberg,
    preset_two_point,
    s1,
    save_scenario,
    stackelberg_kernel,
)
from .solvers import (
    ContractGrid,
    DesignResult,
    InfeasibleError,
    PreferenceDesignSpace,
    PreferenceOption,
    compare_contracts,
    solve_full_info,
    solve_hidden_info,
    solve_preference_design,
)

__version__ = "0.1.0"
