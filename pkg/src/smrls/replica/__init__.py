from smrls.replica.decoupled import (
    BoxLassoSpec,
    L0Spec,
    GenericSpec,
    DecoupledInput,
    DecoupledState,
    NegativeRadicandError,
    tau_theta,
    scalar_rls,
)
from smrls.replica.functionals import functionals, asymptotic_error_rate
from smrls.replica.fixed_point import FixedPointResult, solve_fixed_point
from smrls.replica.tuning import TuneResult, tune, tuning_dictionary
