"""Kinematics of the 3-PPPS parallel robot."""

from .config import SolverOptions, load_options
from .errors import (
    ConfigurationError,
    DegenerateError,
    InvalidInputError,
    KinematicsError,
    NotPlanarError,
    NotSelfMotionError,
)
from .kinematics import (
    DKOutcome,
    OutcomeKind,
    direct_kinematics,
    inverse_kinematics,
    planar_direct_kinematics,
    planar_quadratic_coefficients,
)
from .model import ActuatedJoints, FullJointState, Pose, UnitQuaternion, constraint_residuals
from .selfmotion import CardanicFamily, cardanic_family, self_motion_axes_check, self_motion_condition
from .singularity import (
    eliminated_equivalence_check,
    sample_singularity_surfaces,
    selfmotion_locus_residuals,
    singularity_report,
    velocity_model,
)

__version__ = "0.1.0"
