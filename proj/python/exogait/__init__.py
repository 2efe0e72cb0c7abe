from ._core import (
    AnalogChannel,
    EventKind,
    EventRecord,
    ExogaitError,
    MarkerTrajectory,
    PointFrame,
    Side,
    TorqueProfile,
    Trial,
    DEFAULT_MOMENT_ARM,
    complexity_index,
    fill_gaps,
    fit_lme,
    normalize_cycle,
    read_c3d,
    read_c3d_file,
    reference_tension,
    simulate,
    smooth_to_mse,
    student_t_cdf,
    temporal_params,
    tension_to_torque,
    torque_at,
    torque_to_tension,
    tost_welch,
    write_c3d,
    write_c3d_file,
)

__version__ = "0.1.0"
